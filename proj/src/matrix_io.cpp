#include "poroscat/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "poroscat/errors.hpp"

namespace poroscat {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::scientific, 16);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  if (text == "nan") return std::nan("");
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) throw IoError("malformed number '" + text + "'");
  return value;
}

void write_matrix(std::ostream& os, const ScatteringMatrix& m) {
  os << "# poroscat-matrix 1\n";
  os << "# rows=" << m.values.rows() << "\n";
  os << "# cols=" << m.values.cols() << "\n";
  os << "# points=" << m.num_points << "\n";
  os << "# channels=";
  for (std::size_t i = 0; i < m.channels.size(); ++i) os << (i ? "," : "") << m.channels[i];
  os << "\n";
  os << "# omega=" << format_double(m.omega) << "\n";
  os << "# provenance=" << m.provenance << "\n";
  os << "# epsilon=" << format_double(m.epsilon) << "\n";
  os << "# seed=" << m.seed << "\n";
  os << "# delta=" << format_double(m.delta) << "\n";
  std::string line;
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
      const cplx v = m.values(i, j);
      line = format_double(v.real());
      line += ',';
      line += format_double(v.imag());
      line += '\n';
      os << line;
    }
  }
  if (!os) throw IoError("failed writing matrix");
}

ScatteringMatrix read_matrix(std::istream& is) {
  std::map<std::string, std::string> header;
  std::string line;
  while (is.peek() == '#') {
    std::getline(is, line);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const auto key_begin = line.find_first_not_of("# ");
    header[line.substr(key_begin, eq - key_begin)] = line.substr(eq + 1);
  }
  auto field = [&](const char* key) -> const std::string& {
    const auto it = header.find(key);
    if (it == header.end()) throw IoError(std::string("matrix header lacks '") + key + "'");
    return it->second;
  };
  ScatteringMatrix m;
  const long rows = std::stol(field("rows"));
  const long cols = std::stol(field("cols"));
  if (rows < 0 || cols < 0) throw IoError("negative matrix dimensions");
  m.num_points = std::stoul(field("points"));
  {
    std::stringstream ss(field("channels"));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) m.channels.push_back(std::stoi(tok));
    }
  }
  m.omega = parse_double(field("omega"));
  m.provenance = field("provenance");
  m.epsilon = parse_double(field("epsilon"));
  m.seed = std::stoull(field("seed"));
  m.delta = parse_double(field("delta"));
  m.values.resize(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      if (!std::getline(is, line)) throw IoError("matrix payload truncated");
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw IoError("matrix entry lacks ','");
      m.values(i, j) = cplx(parse_double(line.substr(0, comma)), parse_double(line.substr(comma + 1)));
    }
  }
  return m;
}

void write_matrix_file(const std::string& path, const ScatteringMatrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_matrix(os, m);
}

ScatteringMatrix read_matrix_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  return read_matrix(is);
}

}  // namespace poroscat
