#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "robin/geometry/curve.hpp"

namespace robin::harness {

enum class ExperimentKind { Fiber, Strip, Theorem1, Theorem2, Corollary, Oracle };

std::string to_string(ExperimentKind kind);
/// Throws ConfigError for an unknown name.
ExperimentKind parse_kind(std::string_view name);

struct NamedCurve {
  std::string id;
  geometry::CurvatureProfile profile = geometry::CurvatureProfile::circle(1.0);
};

struct MeshSettings {
  std::size_t n_s = 32;  ///< coarsest level of a strip convergence study
  std::size_t n_t = 16;
  std::size_t levels = 3;
  std::size_t fiber_elements = 512;  ///< coarse level; fiber runs also solve at twice this
  double scale = 1.0;                ///< --mesh-scale

  std::size_t scaled_n_s() const;  ///< rounded to a multiple of 4, at least 8
  std::size_t scaled_n_t() const;  ///< at least 2
  std::size_t scaled_fiber_elements() const;  ///< at least 32
};

/// One experiment. JSON form (schema_version 1):
///
///   {"schema_version": 1, "kind": "theorem1",
///    "curves": [{"id": "oval", "length": 6.283185307179586,
///                "modes": [{"k": 2, "amplitude": 0.5, "phase": 0}]}],
///    "families": [{"type": "capped", "kappa_cap": 1, "c": [0.6, 0.8], "harmonic": 2}],
///    "alpha": [-1, 0, 1], "d": [0.5, "inf"], "perimeters": [3.14159],
///    "kappa_cap": 1, "count": 2,
///    "mesh": {"n_s": 32, "n_t": 16, "levels": 3, "fiber_elements": 512, "scale": 1},
///    "seed": 0}
///
/// Every key is optional; missing ones take the defaults of the kind. Family
/// types: "circle" {radius: [...]}, "two_mode" {length, harmonic, amplitude: [...]},
/// "capped" {kappa_cap, c: [...], harmonic}, "random_capped" {kappa_cap, count,
/// harmonic} (drawn from the seed). Unknown keys are errors.
struct ExperimentConfig {
  int schema_version = 1;
  ExperimentKind kind = ExperimentKind::Oracle;
  std::vector<NamedCurve> curves;
  std::vector<double> alphas;
  std::vector<double> widths;      ///< ∞ allowed ("inf" in JSON)
  std::vector<double> perimeters;  ///< disk/annulus inner lengths (fiber, corollary)
  double kappa_cap = 1.0;          ///< theorem2, corollary
  std::size_t count = 2;           ///< eigenvalues per case (fiber, strip)
  MeshSettings mesh;
  std::uint64_t seed = 0;
};

constexpr int kSchemaVersion = 1;

/// Defaults of each kind (the curve families and parameter grids used when a
/// config leaves them out).
ExperimentConfig default_config(ExperimentKind kind);

/// Parses and validates; throws ConfigError. `kind` supplies the kind when the
/// document has none and must agree with it otherwise.
ExperimentConfig parse_config(const nlohmann::json& doc, std::optional<ExperimentKind> kind = std::nullopt);
ExperimentConfig parse_config_text(const std::string& text, std::optional<ExperimentKind> kind = std::nullopt);
/// Reads a file; throws IoError or ConfigError.
ExperimentConfig load_config(const std::string& path, std::optional<ExperimentKind> kind = std::nullopt);

/// Canonical JSON with the curve list expanded; parse_config(to_json(c)) == c.
nlohmann::json to_json(const ExperimentConfig& config);

/// Checks every (curve, d) pair before any solve: the curve closes and is
/// simple, d < d⋆ for sign-changing curvature, convexity and α < 0 when
/// d = ∞, plus the per-kind preconditions. Throws ConfigError.
void validate(const ExperimentConfig& config);

/// 16 hex digits of FNV-1a over the canonical JSON.
std::string config_hash(const ExperimentConfig& config);

/// Capped convex profile κ = κ∘(c + (1 − c)cos(2πks/L)), L = 2π/(κ∘c).
geometry::CurvatureProfile capped_profile(double kappa_cap, double c, int harmonic);

bool is_circle(const geometry::CurvatureProfile& profile);

}  // namespace robin::harness
