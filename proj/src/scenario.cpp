#include "poroscat/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "poroscat/errors.hpp"

namespace poroscat {

using nlohmann::json;

namespace {

// Walks one JSON object, tracking its pointer path and rejecting unknown keys.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(path_.empty() ? "/" : path_, "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!ok.count(it.key())) throw ValidationError(path_ + "/" + it.key(), "unknown key");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  std::string at(const char* key) const { return path_ + "/" + key; }

  const json& require(const char* key) const {
    if (!j_.contains(key)) throw ValidationError(at(key), "missing required field '" + std::string(key) + "'");
    return j_.at(key);
  }

  Node child(const char* key) const { return Node(require(key), at(key)); }

  double number(const char* key) const {
    const json& v = require(key);
    if (!v.is_number()) throw ValidationError(at(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ValidationError(at(key), "must be finite");
    return d;
  }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  double positive(const char* key) const {
    const double d = number(key);
    if (!(d > 0.0)) throw ValidationError(at(key), "must be positive");
    return d;
  }
  double positive(const char* key, double fallback) const { return has(key) ? positive(key) : fallback; }

  int integer(const char* key, int min_value) const {
    const json& v = require(key);
    if (!v.is_number_integer()) throw ValidationError(at(key), "expected an integer");
    const long long i = v.get<long long>();
    if (i < min_value || i > 1'000'000'000LL) throw ValidationError(at(key), "out of range");
    return static_cast<int>(i);
  }
  int integer(const char* key, int min_value, int fallback) const {
    return has(key) ? integer(key, min_value) : fallback;
  }

  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ValidationError(at(key), "expected a boolean");
    return v.get<bool>();
  }

  std::string string(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ValidationError(at(key), "expected a string");
    return v.get<std::string>();
  }

  cplx complex(const char* key, cplx fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
      return {v[0].get<double>(), v[1].get<double>()};
    }
    throw ValidationError(at(key), "expected a number or [re, im]");
  }

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
};

Vec3 point_from(const json& v, const std::string& path) {
  if (!v.is_array() || (v.size() != 2 && v.size() != 3)) throw ValidationError(path, "expected [x, y] or [x, y, z]");
  Vec3 p = Vec3::Zero();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ValidationError(path, "coordinates must be numbers");
    p[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return p;
}

MaterialParams params_from(const Node& n) {
  n.allow({"lambda", "mu", "M", "rho", "rho_f", "rho_a", "kappa", "phi", "alpha"});
  MaterialParams p;
  p.lambda = n.number("lambda");
  p.mu = n.number("mu");
  p.M = n.number("M");
  p.rho = n.number("rho");
  p.rho_f = n.number("rho_f");
  p.rho_a = n.number("rho_a");
  p.kappa = n.number("kappa");
  p.phi = n.number("phi");
  p.alpha = n.number("alpha");
  return p;
}

ContactParams contact_from(const Node& n, const ContactParams& base) {
  n.allow({"model", "k_t", "k_n", "kappa_f", "alpha_f", "beta_f", "Pi"});
  ContactParams c = base;
  if (n.has("model")) {
    const std::string m = n.string("model", "");
    if (m == "finite") {
      c.model = ContactModel::finite_permeability;
    } else if (m == "high") {
      c.model = ContactModel::high_permeability;
    } else {
      throw ValidationError(n.at("model"), "expected 'finite' or 'high'");
    }
  }
  c.k_t = n.complex("k_t", c.k_t);
  c.k_n = n.complex("k_n", c.k_n);
  c.kappa_f = n.number("kappa_f", c.kappa_f);
  c.alpha_f = n.number("alpha_f", c.alpha_f);
  c.beta_f = n.number("beta_f", c.beta_f);
  c.Pi = n.number("Pi", c.Pi);
  return c;
}

template <class Fn>
auto validated(const std::string& path, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    throw ValidationError(path, e.what());
  }
}

}  // namespace

Scenario parse_scenario(const json& doc) {
  const Node root(doc, "");
  root.allow({"material", "frequency", "scene", "sampling", "forward", "noise", "inversion", "check", "output"});
  Scenario s;

  // material + frequency
  const Node mat = root.child("material");
  mat.allow({"dimensionless", "dimensional", "scales"});
  const Node freq = root.child("frequency");
  freq.allow({"omega"});
  s.input_omega = freq.positive("omega");
  if (mat.has("dimensionless") == mat.has("dimensional")) {
    throw ValidationError("/material", "give exactly one of 'dimensionless' or 'dimensional'");
  }
  if (mat.has("dimensionless")) {
    if (mat.has("scales")) throw ValidationError("/material/scales", "only valid with 'dimensional'");
    s.input_params = params_from(mat.child("dimensionless"));
    s.params = s.input_params;
    s.omega = s.input_omega;
  } else {
    s.dimensional = true;
    s.input_params = params_from(mat.child("dimensional"));
    const Node sc = mat.child("scales");
    sc.allow({"mu_r", "rho_r", "ell_r", "shear_wavelength"});
    if (sc.boolean("shear_wavelength", false)) {
      if (sc.has("ell_r")) throw ValidationError("/material/scales/ell_r", "conflicts with shear_wavelength");
      s.scales = validated("/material/scales", [&] {
        return ReferenceScales::from_shear_wavelength(s.input_params.mu, s.input_params.rho, s.input_omega);
      });
      s.scales.mu_r = sc.positive("mu_r", s.scales.mu_r);
      s.scales.rho_r = sc.positive("rho_r", s.scales.rho_r);
    } else {
      s.scales = {sc.positive("mu_r"), sc.positive("rho_r"), sc.positive("ell_r")};
    }
    const DimensionlessProblem dp =
        validated("/material/dimensional", [&] { return nondimensionalize(s.input_params, s.input_omega, s.scales); });
    s.params = dp.params;
    s.omega = dp.omega;
  }
  validated("/material", [&] {
    s.params.validate();
    return 0;
  });

  // scene
  const Node scene = root.child("scene");
  scene.allow({"wells", "samples_per_segment", "channels", "contact", "fractures"});
  const json& wells = scene.require("wells");
  if (!wells.is_array() || wells.empty()) throw ValidationError("/scene/wells", "expected a non-empty array");
  for (std::size_t w = 0; w < wells.size(); ++w) {
    const std::string wp = "/scene/wells/" + std::to_string(w);
    if (!wells[w].is_array() || wells[w].size() < 2) throw ValidationError(wp, "a well needs at least two vertices");
    Polyline line;
    for (std::size_t v = 0; v < wells[w].size(); ++v) line.push_back(point_from(wells[w][v], wp + "/" + std::to_string(v)));
    s.wells.push_back(std::move(line));
  }
  s.samples_per_segment = scene.integer("samples_per_segment", 1);
  s.channels = validated("/scene/channels", [&] { return parse_channel_set(scene.string("channels", "full")); });
  // Default out-of-plane extent: one shear wavelength.
  const double shear_wavelength = validated("/material", [&] {
    return 2.0 * kPi / solve_dispersion(s.params, s.omega).k_s.real();
  });
  ContactParams base;
  if (scene.has("contact")) base = contact_from(scene.child("contact"), base);
  if (scene.has("fractures")) {
    const json& fr = scene.require("fractures");
    if (!fr.is_array()) throw ValidationError("/scene/fractures", "expected an array");
    for (std::size_t i = 0; i < fr.size(); ++i) {
      const Node f(fr[i], "/scene/fractures/" + std::to_string(i));
      f.allow({"center", "length", "width", "angle_pi", "angle_deg", "cells", "contact"});
      FractureSpec spec;
      spec.center = point_from(f.require("center"), f.at("center"));
      spec.length = f.positive("length");
      spec.width = f.positive("width", shear_wavelength);
      if (f.has("angle_pi") == f.has("angle_deg")) {
        throw ValidationError(f.path(), "give exactly one of 'angle_pi' or 'angle_deg'");
      }
      spec.angle_pi = f.has("angle_pi") ? f.number("angle_pi") : f.number("angle_deg") / 180.0;
      if (f.has("cells")) {
        const json& c = f.require("cells");
        if (!c.is_array() || c.size() != 2 || !c[0].is_number_integer() || !c[1].is_number_integer() ||
            c[0].get<int>() < 1 || c[1].get<int>() < 1) {
          throw ValidationError(f.at("cells"), "expected [along, across] positive integers");
        }
        spec.cells_along = c[0].get<int>();
        spec.cells_across = c[1].get<int>();
      }
      spec.contact = f.has("contact") ? contact_from(f.child("contact"), base) : base;
      validated(f.at("contact"), [&] {
        spec.contact.validate();
        return 0;
      });
      s.fractures.push_back(spec);
    }
  }

  // sampling
  const Node smp = root.child("sampling");
  smp.allow({"region", "resolution", "normals", "full_circle", "iotas", "z"});
  {
    const json& r = smp.require("region");
    if (!r.is_array() || r.size() != 4) throw ValidationError("/sampling/region", "expected [x_min, x_max, y_min, y_max]");
    for (int i = 0; i < 4; ++i) {
      if (!r[i].is_number()) throw ValidationError("/sampling/region", "expected numbers");
      s.region[i] = r[i].get<double>();
    }
    const json& res = smp.require("resolution");
    if (!res.is_array() || res.size() != 2 || !res[0].is_number_integer() || !res[1].is_number_integer()) {
      throw ValidationError("/sampling/resolution", "expected [nx, ny]");
    }
    s.nx = res[0].get<int>();
    s.ny = res[1].get<int>();
    s.n_dir = smp.integer("normals", 1);
    s.full_circle = smp.boolean("full_circle", false);
    s.sampling_z = smp.number("z", 0.0);
    if (smp.has("iotas")) {
      const json& io = smp.require("iotas");
      if (!io.is_array()) throw ValidationError("/sampling/iotas", "expected an array");
      s.iotas.clear();
      for (const json& v : io) {
        if (!v.is_number_integer()) throw ValidationError("/sampling/iotas", "expected integers");
        s.iotas.push_back(v.get<int>());
      }
    }
    validated("/sampling", [&] { return build_sampling(s); });
  }

  // forward
  if (root.has("forward")) {
    const Node fw = root.child("forward");
    fw.allow({"mode", "coupling_cutoff"});
    s.mode = validated("/forward/mode", [&] { return parse_solve_mode(fw.string("mode", "local")); });
    s.coupling_cutoff = fw.number("coupling_cutoff", s.coupling_cutoff);
  }

  // noise
  if (root.has("noise")) {
    const Node nz = root.child("noise");
    nz.allow({"epsilon", "target_delta", "seed"});
    if (nz.has("epsilon") && nz.has("target_delta")) {
      throw ValidationError("/noise", "give either 'epsilon' or 'target_delta'");
    }
    if (nz.has("epsilon")) {
      s.epsilon = nz.number("epsilon");
      if (*s.epsilon < 0.0) throw ValidationError("/noise/epsilon", "must be non-negative");
    }
    if (nz.has("target_delta")) {
      s.target_delta = nz.number("target_delta");
      if (*s.target_delta < 0.0) throw ValidationError("/noise/target_delta", "must be non-negative");
    }
    if (nz.has("seed")) {
      const json& v = nz.require("seed");
      if (!v.is_number_unsigned()) throw ValidationError("/noise/seed", "expected a non-negative integer");
      s.seed = v.get<std::uint64_t>();
    }
  }

  // inversion
  if (root.has("inversion")) {
    const Node inv = root.child("inversion");
    inv.allow({"method", "alpha_policy", "delta_floor", "eta_bracket"});
    s.method = validated("/inversion/method", [&] { return parse_method(inv.string("method", "lsm")); });
    s.alpha_policy =
        validated("/inversion/alpha_policy", [&] { return parse_alpha_policy(inv.string("alpha_policy", "per_point")); });
    s.delta_floor = inv.number("delta_floor", s.delta_floor);
    if (s.delta_floor < 0.0) throw ValidationError("/inversion/delta_floor", "must be non-negative");
    if (inv.has("eta_bracket")) {
      const json& b = inv.require("eta_bracket");
      if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number() || !(b[0].get<double>() > 0.0) ||
          !(b[1].get<double>() > b[0].get<double>())) {
        throw ValidationError("/inversion/eta_bracket", "expected [lo, hi] with 0 < lo < hi");
      }
      s.eta_bracket_relative = {b[0].get<double>(), b[1].get<double>()};
    }
  }

  if (root.has("check")) {
    const Node ck = root.child("check");
    ck.allow({"admissibility_trials"});
    s.admissibility_trials = ck.integer("admissibility_trials", 1, s.admissibility_trials);
  }

  if (root.has("output")) {
    const Node out = root.child("output");
    out.allow({"dir", "pgm"});
    s.output_dir = out.string("dir", s.output_dir);
    s.write_pgm = out.boolean("pgm", s.write_pgm);
  }

  validated("/scene", [&] {
    build_scene(s).validate();
    return 0;
  });
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open scenario '" + path + "'");
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ValidationError("/", std::string("JSON parse error: ") + e.what());
  }
  return parse_scenario(doc);
}

namespace {

json params_json(const MaterialParams& p) {
  return json{{"lambda", p.lambda}, {"mu", p.mu},       {"M", p.M},         {"rho", p.rho},     {"rho_f", p.rho_f},
              {"rho_a", p.rho_a},   {"kappa", p.kappa}, {"phi", p.phi},     {"alpha", p.alpha}};
}

json complex_json(cplx z) {
  if (z.imag() == 0.0) return z.real();
  return json::array({z.real(), z.imag()});
}

json contact_json(const ContactParams& c) {
  return json{{"model", c.model == ContactModel::high_permeability ? "high" : "finite"},
              {"k_t", complex_json(c.k_t)},
              {"k_n", complex_json(c.k_n)},
              {"kappa_f", c.kappa_f},
              {"alpha_f", c.alpha_f},
              {"beta_f", c.beta_f},
              {"Pi", c.Pi}};
}

json point_json(const Vec3& p) { return json::array({p.x(), p.y(), p.z()}); }

}  // namespace

json resolved_json(const Scenario& s) {
  json j;
  if (s.dimensional) {
    j["material"]["dimensional"] = params_json(s.input_params);
    j["material"]["scales"] = {{"mu_r", s.scales.mu_r}, {"rho_r", s.scales.rho_r}, {"ell_r", s.scales.ell_r}};
  } else {
    j["material"]["dimensionless"] = params_json(s.input_params);
  }
  j["frequency"]["omega"] = s.input_omega;
  json wells = json::array();
  for (const Polyline& l : s.wells) {
    json line = json::array();
    for (const Vec3& v : l) line.push_back(point_json(v));
    wells.push_back(line);
  }
  j["scene"]["wells"] = wells;
  j["scene"]["samples_per_segment"] = s.samples_per_segment;
  j["scene"]["channels"] = to_string(s.channels);
  json fr = json::array();
  for (const FractureSpec& f : s.fractures) {
    fr.push_back({{"center", point_json(f.center)},
                  {"length", f.length},
                  {"width", f.width},
                  {"angle_pi", f.angle_pi},
                  {"cells", json::array({f.cells_along, f.cells_across})},
                  {"contact", contact_json(f.contact)}});
  }
  j["scene"]["fractures"] = fr;
  j["sampling"] = {{"region", json::array({s.region[0], s.region[1], s.region[2], s.region[3]})},
                   {"resolution", json::array({s.nx, s.ny})},
                   {"normals", s.n_dir},
                   {"full_circle", s.full_circle},
                   {"iotas", s.iotas},
                   {"z", s.sampling_z}};
  j["forward"] = {{"mode", to_string(s.mode)}, {"coupling_cutoff", s.coupling_cutoff}};
  json noise = {{"seed", s.seed}};
  if (s.epsilon) noise["epsilon"] = *s.epsilon;
  if (s.target_delta) noise["target_delta"] = *s.target_delta;
  j["noise"] = noise;
  j["inversion"] = {{"method", to_string(s.method)},
                    {"alpha_policy", to_string(s.alpha_policy)},
                    {"delta_floor", s.delta_floor},
                    {"eta_bracket", json::array({s.eta_bracket_relative.lo, s.eta_bracket_relative.hi})}};
  j["check"] = {{"admissibility_trials", s.admissibility_trials}};
  j["output"] = {{"dir", s.output_dir}, {"pgm", s.write_pgm}};
  return j;
}

FractureScene build_scene(const Scenario& s) {
  FractureScene scene;
  scene.grid = build_sensing_grid(s.wells, s.samples_per_segment, s.channels);
  for (const FractureSpec& f : s.fractures) {
    scene.patches.push_back(
        build_ribbon_patch(f.center, f.length, f.angle(), f.width, f.cells_along, f.cells_across, f.contact));
  }
  return scene;
}

SamplingGrid build_sampling(const Scenario& s) {
  return build_sampling_grid(s.region[0], s.region[1], s.region[2], s.region[3], s.nx, s.ny, s.n_dir, s.iotas,
                             s.full_circle, s.sampling_z);
}

}  // namespace poroscat
