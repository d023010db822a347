#include "poroscat/errors.hpp"

namespace poroscat {

int exit_code_for(const Error& error) noexcept {
  switch (error.kind()) {
    case Error::Kind::validation:
      return 2;
    case Error::Kind::numerical:
      return 3;
    case Error::Kind::io:
      return 4;
  }
  return 1;
}

}  // namespace poroscat
