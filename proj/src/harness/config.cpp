#include "robin/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "robin/errors.hpp"

namespace robin::harness {

namespace {

using geometry::kTwoPi;
using nlohmann::json;

constexpr double kPi = kTwoPi / 2;

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
    }
  }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: '{}': {}", where, key, e.what()));
  }
}

template <typename T>
std::vector<T> get_list(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(fmt::format("{}: '{}' must be an array", where, key));
  return get<std::vector<T>>(obj, key, where);
}

double parse_width(const json& v) {
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return geometry::kInfinity;
    throw ConfigError(fmt::format("'d': unknown value {} (use a number or \"inf\")", v.dump()));
  }
  if (!v.is_number()) throw ConfigError(fmt::format("'d': unknown value {}", v.dump()));
  return v.get<double>();
}

json width_json(double d) { return std::isinf(d) ? json("inf") : json(d); }

std::string number_id(double x) { return fmt::format("{:g}", x); }

geometry::CurvatureProfile make_profile(double length, std::vector<geometry::FourierMode> modes, const std::string& id) {
  try {
    return {length, std::move(modes)};
  } catch (const std::exception& e) {
    throw ConfigError(fmt::format("curve '{}': {}", id, e.what()));
  }
}

NamedCurve parse_curve(const json& c, std::size_t index) {
  const std::string where = fmt::format("curves[{}]", index);
  check_keys(c, {"id", "length", "modes", "circle"}, where);
  NamedCurve out;
  out.id = c.contains("id") ? get<std::string>(c, "id", where) : fmt::format("curve-{}", index);
  if (c.contains("circle")) {
    if (c.contains("length") || c.contains("modes")) throw ConfigError(where + ": 'circle' excludes 'length' and 'modes'");
    const double r = get<double>(c, "circle", where);
    if (!(r > 0)) throw ConfigError(where + ": circle radius must be positive");
    out.profile = geometry::CurvatureProfile::circle(r);
    return out;
  }
  if (!c.contains("length")) throw ConfigError(where + ": missing 'length'");
  std::vector<geometry::FourierMode> modes;
  if (c.contains("modes")) {
    if (!c["modes"].is_array()) throw ConfigError(where + ": 'modes' must be an array");
    for (const auto& m : c["modes"]) {
      check_keys(m, {"k", "amplitude", "phase"}, where + ".modes");
      geometry::FourierMode mode;
      mode.k = get<int>(m, "k", where);
      mode.amplitude = get<double>(m, "amplitude", where);
      mode.phase = m.contains("phase") ? get<double>(m, "phase", where) : 0.0;
      modes.push_back(mode);
    }
  }
  out.profile = make_profile(get<double>(c, "length", where), std::move(modes), out.id);
  return out;
}

std::vector<NamedCurve> expand_family(const json& f, std::size_t index, std::uint64_t seed) {
  const std::string where = fmt::format("families[{}]", index);
  if (!f.is_object() || !f.contains("type")) throw ConfigError(where + ": missing 'type'");
  const auto type = get<std::string>(f, "type", where);
  std::vector<NamedCurve> out;
  if (type == "circle") {
    check_keys(f, {"type", "radius"}, where);
    for (double r : get_list<double>(f, "radius", where)) {
      if (!(r > 0)) throw ConfigError(where + ": circle radius must be positive");
      out.push_back({"circle-" + number_id(r), geometry::CurvatureProfile::circle(r)});
    }
  } else if (type == "two_mode") {
    check_keys(f, {"type", "length", "harmonic", "amplitude", "phase"}, where);
    const double length = f.contains("length") ? get<double>(f, "length", where) : kTwoPi;
    const int k = get<int>(f, "harmonic", where);
    const double phase = f.contains("phase") ? get<double>(f, "phase", where) : 0.0;
    for (double a : get_list<double>(f, "amplitude", where)) {
      const std::string id = fmt::format("mode{}-{}", k, number_id(a));
      out.push_back({id, make_profile(length, {{k, a, phase}}, id)});
    }
  } else if (type == "capped") {
    check_keys(f, {"type", "kappa_cap", "c", "harmonic"}, where);
    const double cap = get<double>(f, "kappa_cap", where);
    const int k = f.contains("harmonic") ? get<int>(f, "harmonic", where) : 2;
    for (double c : get_list<double>(f, "c", where)) {
      if (!(c > 0 && c <= 1)) throw ConfigError(where + ": c must lie in (0, 1]");
      out.push_back({fmt::format("capped{}-{}", k, number_id(c)), capped_profile(cap, c, k)});
    }
  } else if (type == "random_capped") {
    check_keys(f, {"type", "kappa_cap", "count", "harmonic"}, where);
    const double cap = get<double>(f, "kappa_cap", where);
    const int k = f.contains("harmonic") ? get<int>(f, "harmonic", where) : 2;
    const auto count = get<std::size_t>(f, "count", where);
    std::mt19937_64 rng(seed + index);
    std::uniform_real_distribution<double> dist(0.55, 0.95);
    for (std::size_t i = 0; i < count; ++i) {
      const double c = dist(rng);
      out.push_back({fmt::format("random{}-{}", k, i), capped_profile(cap, c, k)});
    }
  } else {
    throw ConfigError(fmt::format("{}: unknown family type '{}'", where, type));
  }
  for (const auto& c : out) {
    if (!(c.profile.length() > 0)) throw ConfigError(where + ": non-positive length");
  }
  return out;
}

std::vector<NamedCurve> two_mode(double length, int k, std::initializer_list<double> amplitudes) {
  std::vector<NamedCurve> out;
  for (double a : amplitudes) out.push_back({fmt::format("mode{}-{}", k, number_id(a)), {length, {{k, a, 0.0}}}});
  return out;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Fiber: return "fiber";
    case ExperimentKind::Strip: return "strip";
    case ExperimentKind::Theorem1: return "theorem1";
    case ExperimentKind::Theorem2: return "theorem2";
    case ExperimentKind::Corollary: return "corollary";
    case ExperimentKind::Oracle: return "oracle";
  }
  return "unknown";
}

ExperimentKind parse_kind(std::string_view name) {
  for (auto k : {ExperimentKind::Fiber, ExperimentKind::Strip, ExperimentKind::Theorem1, ExperimentKind::Theorem2,
                 ExperimentKind::Corollary, ExperimentKind::Oracle}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError(fmt::format("unknown experiment kind '{}'", name));
}

std::size_t MeshSettings::scaled_n_s() const {
  const auto n = static_cast<std::size_t>(std::llround(static_cast<double>(n_s) * scale / 4.0)) * 4;
  return std::max<std::size_t>(8, n);
}
std::size_t MeshSettings::scaled_n_t() const {
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(static_cast<double>(n_t) * scale)));
}
std::size_t MeshSettings::scaled_fiber_elements() const {
  return std::max<std::size_t>(32, static_cast<std::size_t>(std::llround(static_cast<double>(fiber_elements) * scale)));
}

geometry::CurvatureProfile capped_profile(double kappa_cap, double c, int harmonic) {
  if (!(kappa_cap > 0)) throw ConfigError("capped family: kappa_cap must be positive");
  return {kTwoPi / (kappa_cap * c), {{harmonic, kappa_cap * (1 - c), 0.0}}};
}

bool is_circle(const geometry::CurvatureProfile& profile) {
  return std::all_of(profile.modes().begin(), profile.modes().end(),
                     [](const geometry::FourierMode& m) { return m.amplitude == 0.0; });
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::Fiber:
      c.perimeters = {kTwoPi};
      c.alphas = {-2, -1, -0.5, 0, 1};
      c.widths = {geometry::kInfinity, 0.5};
      break;
    case ExperimentKind::Strip:
      c.curves = two_mode(kTwoPi, 2, {0.5});
      c.alphas = {-1};
      c.widths = {0.5};
      break;
    case ExperimentKind::Theorem1: {
      c.curves = {{"circle-1", geometry::CurvatureProfile::circle(1.0)}};
      for (auto& x : two_mode(kTwoPi, 2, {0.3, 0.6, 0.9})) c.curves.push_back(x);
      for (auto& x : two_mode(kTwoPi, 2, {1.5})) c.curves.push_back(x);
      for (auto& x : two_mode(kTwoPi, 3, {1.5})) c.curves.push_back(x);
      for (auto& x : two_mode(kTwoPi, 4, {1.3})) c.curves.push_back(x);
      c.alphas = {-4, -2, -1, -0.5, 0, 0.5, 1, 2};
      c.widths = {0.25, 0.5};
      break;
    }
    case ExperimentKind::Theorem2:
      c.curves = {{"circle-1", geometry::CurvatureProfile::circle(1.0)}};
      for (double x : {0.6, 0.7, 0.8, 0.9}) c.curves.push_back({"capped2-" + number_id(x), capped_profile(1.0, x, 2)});
      c.alphas = {-4, -2, -1};
      c.widths = {geometry::kInfinity};
      c.mesh.n_t = 32;
      break;
    case ExperimentKind::Corollary:
      c.curves = {{"circle-1", geometry::CurvatureProfile::circle(1.0)}};
      for (double x : {0.6, 0.8}) c.curves.push_back({"capped2-" + number_id(x), capped_profile(1.0, x, 2)});
      c.alphas = {-2};
      c.widths = {geometry::kInfinity};
      c.perimeters = {kPi, 2 * kPi, 3 * kPi, 4 * kPi};
      c.mesh.n_t = 32;
      break;
    case ExperimentKind::Oracle:
      c.alphas = {-0.5, -1, -2};
      c.mesh.n_t = 64;
      break;
  }
  return c;
}

ExperimentConfig parse_config(const json& doc, std::optional<ExperimentKind> kind) {
  check_keys(doc,
             {"schema_version", "kind", "curves", "families", "alpha", "d", "perimeters", "kappa_cap", "count", "mesh",
              "seed"},
             "config");
  if (doc.contains("schema_version")) {
    const int v = get<int>(doc, "schema_version", "config");
    if (v != kSchemaVersion) throw ConfigError(fmt::format("config: schema_version {} is not supported", v));
  }
  if (doc.contains("kind")) {
    const auto k = parse_kind(get<std::string>(doc, "kind", "config"));
    if (kind && *kind != k) {
      throw ConfigError(fmt::format("config: kind '{}' does not match the command '{}'", to_string(k), to_string(*kind)));
    }
    kind = k;
  }
  if (!kind) throw ConfigError("config: missing 'kind'");

  ExperimentConfig c = default_config(*kind);
  if (doc.contains("seed")) c.seed = get<std::uint64_t>(doc, "seed", "config");
  if (doc.contains("curves") || doc.contains("families")) {
    c.curves.clear();
    if (doc.contains("curves")) {
      if (!doc["curves"].is_array()) throw ConfigError("config: 'curves' must be an array");
      for (std::size_t i = 0; i < doc["curves"].size(); ++i) c.curves.push_back(parse_curve(doc["curves"][i], i));
    }
    if (doc.contains("families")) {
      if (!doc["families"].is_array()) throw ConfigError("config: 'families' must be an array");
      for (std::size_t i = 0; i < doc["families"].size(); ++i) {
        for (auto& x : expand_family(doc["families"][i], i, c.seed)) c.curves.push_back(std::move(x));
      }
    }
  }
  if (doc.contains("alpha")) c.alphas = get_list<double>(doc, "alpha", "config");
  if (doc.contains("d")) {
    if (!doc["d"].is_array()) throw ConfigError("config: 'd' must be an array");
    c.widths.clear();
    for (const auto& v : doc["d"]) c.widths.push_back(parse_width(v));
  }
  if (doc.contains("perimeters")) c.perimeters = get_list<double>(doc, "perimeters", "config");
  if (doc.contains("kappa_cap")) c.kappa_cap = get<double>(doc, "kappa_cap", "config");
  if (doc.contains("count")) c.count = get<std::size_t>(doc, "count", "config");
  if (doc.contains("mesh")) {
    const auto& m = doc["mesh"];
    check_keys(m, {"n_s", "n_t", "levels", "fiber_elements", "scale"}, "mesh");
    if (m.contains("n_s")) c.mesh.n_s = get<std::size_t>(m, "n_s", "mesh");
    if (m.contains("n_t")) c.mesh.n_t = get<std::size_t>(m, "n_t", "mesh");
    if (m.contains("levels")) c.mesh.levels = get<std::size_t>(m, "levels", "mesh");
    if (m.contains("fiber_elements")) c.mesh.fiber_elements = get<std::size_t>(m, "fiber_elements", "mesh");
    if (m.contains("scale")) c.mesh.scale = get<double>(m, "scale", "mesh");
  }
  validate(c);
  return c;
}

ExperimentConfig parse_config_text(const std::string& text, std::optional<ExperimentKind> kind) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config(doc, kind);
}

ExperimentConfig load_config(const std::string& path, std::optional<ExperimentKind> kind) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), kind);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["kind"] = to_string(c.kind);
  j["curves"] = json::array();
  for (const auto& curve : c.curves) {
    json modes = json::array();
    for (const auto& m : curve.profile.modes()) modes.push_back({{"k", m.k}, {"amplitude", m.amplitude}, {"phase", m.phase}});
    j["curves"].push_back({{"id", curve.id}, {"length", curve.profile.length()}, {"modes", modes}});
  }
  j["alpha"] = c.alphas;
  j["d"] = json::array();
  for (double d : c.widths) j["d"].push_back(width_json(d));
  j["perimeters"] = c.perimeters;
  j["kappa_cap"] = c.kappa_cap;
  j["count"] = c.count;
  j["mesh"] = {{"n_s", c.mesh.n_s},
               {"n_t", c.mesh.n_t},
               {"levels", c.mesh.levels},
               {"fiber_elements", c.mesh.fiber_elements},
               {"scale", c.mesh.scale}};
  j["seed"] = c.seed;
  return j;
}

void validate(const ExperimentConfig& c) {
  const bool strip_kind = c.kind == ExperimentKind::Strip || c.kind == ExperimentKind::Theorem1 ||
                          c.kind == ExperimentKind::Theorem2 || c.kind == ExperimentKind::Corollary;
  if (c.count == 0) throw ConfigError("config: count must be at least 1");
  if (c.mesh.n_s < 8 || c.mesh.n_s % 4 != 0) throw ConfigError("mesh: n_s must be a multiple of 4, at least 8");
  if (c.mesh.n_t < 2) throw ConfigError("mesh: n_t must be at least 2");
  if (c.mesh.fiber_elements < 32) throw ConfigError("mesh: fiber_elements must be at least 32");
  if (!(c.mesh.scale > 0) || !std::isfinite(c.mesh.scale)) throw ConfigError("mesh: scale must be positive");
  if (strip_kind && c.mesh.levels < 2) throw ConfigError("mesh: levels must be at least 2");
  for (double a : c.alphas) {
    if (!std::isfinite(a)) throw ConfigError("config: alpha values must be finite");
  }
  for (double d : c.widths) {
    if (!(d > 0)) throw ConfigError("config: widths must be positive or \"inf\"");
  }
  for (double l : c.perimeters) {
    if (!(l > 0) || !std::isfinite(l)) throw ConfigError("config: perimeters must be positive");
  }
  std::set<std::string> ids;
  for (const auto& curve : c.curves) {
    if (!ids.insert(curve.id).second) throw ConfigError(fmt::format("config: duplicate curve id '{}'", curve.id));
  }

  const bool exterior_only = c.kind == ExperimentKind::Theorem2 || c.kind == ExperimentKind::Corollary;
  if (exterior_only) {
    if (!(c.kappa_cap > 0)) throw ConfigError("config: kappa_cap must be positive");
    for (double a : c.alphas) {
      if (!(a < 0)) throw ConfigError(fmt::format("config: {} needs alpha < 0 (got {})", to_string(c.kind), a));
    }
  }
  if (c.kind == ExperimentKind::Theorem1) {
    for (double d : c.widths) {
      if (std::isinf(d)) throw ConfigError("theorem1: d must be finite (the exterior case is covered by theorem2)");
    }
    for (const auto& curve : c.curves) {
      if (std::abs(curve.profile.length() - c.curves.front().profile.length()) > 1e-12 * curve.profile.length()) {
        throw ConfigError(fmt::format("theorem1: curve '{}' has length {} but '{}' has {}", curve.id,
                                      curve.profile.length(), c.curves.front().id, c.curves.front().profile.length()));
      }
    }
  }
  if (!strip_kind) return;

  const std::vector<double> widths = exterior_only ? std::vector<double>{geometry::kInfinity} : c.widths;
  for (const auto& curve : c.curves) {
    geometry::PlanarCurve built;
    try {
      built = geometry::build_curve(curve.profile, std::max<std::size_t>(256, 16 * curve.profile.max_harmonic()));
    } catch (const Error& e) {
      throw ConfigError(fmt::format("curve '{}': {}", curve.id, e.what()));
    }
    const auto stats = geometry::curvature_stats(built);
    for (double d : widths) {
      if (std::isinf(d)) {
        if (stats.min_kappa < 0) {
          throw ConfigError(fmt::format("curve '{}': d = inf needs a convex curve (min curvature {:.6g})", curve.id,
                                        stats.min_kappa));
        }
        for (double a : c.alphas) {
          if (!(a < 0)) throw ConfigError(fmt::format("curve '{}': d = inf needs alpha < 0 (got {})", curve.id, a));
        }
      } else if (stats.min_kappa < 0) {
        const auto cw = geometry::critical_width(built);
        if (!(d < cw.value)) {
          throw ConfigError(fmt::format("curve '{}': d = {} is not below the critical width {:.6g}", curve.id, d, cw.value));
        }
      }
    }
    if (exterior_only && stats.max_kappa > c.kappa_cap * (1 + 1e-12)) {
      throw ConfigError(fmt::format("curve '{}': max curvature {:.12g} exceeds kappa_cap {}", curve.id, stats.max_kappa,
                                    c.kappa_cap));
    }
  }
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace robin::harness
