#pragma once

#include <cstddef>

#include "robin/harness/config.hpp"
#include "robin/harness/record.hpp"

namespace robin::harness {

/// Per-case work runs on a pool of `workers` threads; records come back
/// sorted by case_id, so the result does not depend on the worker count.
/// A case that throws is recorded with verdict "error" and the run goes on.
RunRecord run_experiment(const ExperimentConfig& config, std::size_t workers = 1);

/// Fiber spectra of the disk exterior (d = ∞) or annulus for each
/// perimeter × α × d.
RunRecord run_fiber(const ExperimentConfig& config, std::size_t workers = 1);
/// 2-D strip eigenvalues with a convergence study for each curve × α × d.
RunRecord run_strip(const ExperimentConfig& config, std::size_t workers = 1);
/// λ₁(Ω_d) ≤ λ₁(annulus) for each curve × α × d, with the transplantation
/// identity R[u⋆] = λ₁(annulus) recorded per case.
RunRecord run_theorem1(const ExperimentConfig& config, std::size_t workers = 1);
/// λ₂(Ω^c) ≤ max(R[u⋆], R[v⋆]) < λ₂(𝓑^c) for each convex curve × α, with 𝓑
/// the disk of curvature κ∘.
RunRecord run_theorem2(const ExperimentConfig& config, std::size_t workers = 1);
/// λ₂ of the disk exterior against its perimeter, and the κ∘-disk against
/// the curve family.
RunRecord run_corollary(const ExperimentConfig& config, std::size_t workers = 1);
/// Cross-validation battery: fiber against the secular equation, 2-D against
/// fiber on circles, Dirichlet and half-line limits, presence and absence
/// of discrete spectrum.
RunRecord run_oracle_suite(const ExperimentConfig& config, std::size_t workers = 1);

/// The α below which the exterior of the disk of radius R has an n = 1
/// bound state, by bisection on the secular equation over [lo, hi].
double second_bound_threshold(double radius, double lo = -20.0, double hi = -1e-3, double tol = 1e-10);

}  // namespace robin::harness
