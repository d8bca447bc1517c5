#include "robin/harness/runners.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "robin/errors.hpp"
#include "robin/fiber/fiber.hpp"
#include "robin/special/bessel.hpp"
#include "robin/strip/strip.hpp"
#include "robin/transplant/transplant.hpp"

#ifndef ROBINSTRIP_VERSION
#define ROBINSTRIP_VERSION "unknown"
#endif

namespace robin::harness {

namespace {

using geometry::kInfinity;
using geometry::kTwoPi;
using nlohmann::json;

struct Job {
  std::string case_id;
  std::string curve_id;
  double alpha = 0.0;
  std::optional<double> width;
  std::function<CaseResult()> run;
};

std::string width_id(double d) { return std::isinf(d) ? "inf" : fmt::format("{:g}", d); }

std::string make_id(std::size_t index, const std::string& what, double alpha, std::optional<double> d = std::nullopt) {
  std::string id = fmt::format("{:04d}-{}-a{:g}", index, what, alpha);
  if (d) id += "-d" + width_id(*d);
  return id;
}

RunRecord new_record(const ExperimentConfig& config) {
  RunRecord r;
  r.schema_version = kSchemaVersion;
  r.kind = to_string(config.kind);
  r.software_version = ROBINSTRIP_VERSION;
  r.config_hash = config_hash(config);
  r.config = to_json(config);
  return r;
}

void run_jobs(std::vector<Job>& jobs, std::size_t workers, RunRecord& record) {
  std::vector<CaseResult> results(jobs.size());
  std::vector<double> seconds(jobs.size(), 0.0);
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto start = std::chrono::steady_clock::now();
      CaseResult c;
      try {
        c = jobs[i].run();
      } catch (const SecondBoundStateAbsent& e) {
        c.verdict = verdict::kAbsent;
        c.note = e.what();
      } catch (const std::exception& e) {
        c.verdict = verdict::kError;
        c.note = e.what();
        c.details["exception"] = e.what();
      }
      c.case_id = jobs[i].case_id;
      if (c.curve_id.empty()) c.curve_id = jobs[i].curve_id;
      c.alpha = jobs[i].alpha;
      if (!c.width) c.width = jobs[i].width;
      results[i] = std::move(c);
      seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(workers, jobs.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  double total = 0.0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    record.timings["cases"][results[i].case_id] = seconds[i];
    total += seconds[i];
  }
  record.timings["case_total"] = total;
  for (auto& c : results) record.cases.push_back(std::move(c));
  std::sort(record.cases.begin(), record.cases.end(),
            [](const CaseResult& a, const CaseResult& b) { return a.case_id < b.case_id; });
}

geometry::PlanarCurve quadrature_curve(const geometry::CurvatureProfile& profile) {
  geometry::BuildOptions relaxed;
  relaxed.require_simple = false;  // validated up front
  return geometry::build_curve(profile, std::max<std::size_t>(512, 32 * static_cast<std::size_t>(profile.max_harmonic())),
                               relaxed);
}

json strip_details(const strip::ConvergenceReport& rep) {
  json levels = json::array();
  for (std::size_t l = 0; l < rep.levels.size(); ++l) {
    levels.push_back({{"n_s", rep.levels[l].first}, {"n_t", rep.levels[l].second}, {"values", rep.values[l]}});
  }
  json ext = json::array();
  for (const auto& e : rep.extrapolated) ext.push_back({{"value", e.value}, {"errbar", e.errbar}});
  json order = json::array();
  for (double o : rep.observed_order) order.push_back(std::isfinite(o) ? json(o) : json(nullptr));
  json pairs = json::array();
  for (const auto& [a, b] : rep.finest.degenerate_pairs) pairs.push_back({a, b});
  return {{"levels", levels},
          {"extrapolated", ext},
          {"observed_order", order},
          {"monotone", rep.monotone},
          {"non_monotone_convergence", rep.non_monotone_convergence},
          {"degenerate_pairs", pairs},
          {"truncation", rep.finest.truncation}};
}

json fiber_details(const fiber::FiberConvergence& fc) {
  json ext = json::array();
  for (const auto& e : fc.values) ext.push_back({{"value", e.value}, {"errbar", e.errbar}, {"coarse", e.coarse}, {"fine", e.fine}});
  return {{"mode", fc.mode}, {"extrapolated", ext}, {"truncation", fc.truncation}, {"elements", fc.coarse.elements}};
}

strip::StripProblem strip_problem(const NamedCurve& curve, double d, double alpha, const MeshSettings& mesh,
                                  double truncation = 0.0) {
  return strip::make_strip_problem(curve.profile, d, alpha, mesh.scaled_n_s(), mesh.scaled_n_t(), truncation);
}

// --- shared by the theorem2 and corollary runs ----------------------------

struct DiskData {
  double alpha = 0.0;
  std::optional<double> lambda1, lambda2;  // secular equation
  fiber::Extrapolated fiber1, fiber2;
  transplant::RadialProfilePair profiles;
  double truncation = 0.0;
  bool second = false;
};

DiskData disk_data(double kappa_cap, double alpha, const MeshSettings& mesh) {
  DiskData d;
  d.alpha = alpha;
  const double radius = 1.0 / kappa_cap;
  const double perimeter = kTwoPi * radius;
  d.lambda1 = special::secular_oracle(0, radius, alpha);
  d.lambda2 = special::secular_oracle(1, radius, alpha);
  const std::size_t elements = mesh.scaled_fiber_elements();
  d.profiles = transplant::disk_profiles(perimeter, alpha, 2 * elements);
  d.second = d.lambda2.has_value() && d.profiles.has_phi();
  d.truncation = std::max(d.profiles.psi.t.back(), d.second ? d.profiles.phi.t.back() : 0.0);
  const auto f0 = fiber::fiber_convergence(0, perimeter, kInfinity, alpha, elements);
  if (!f0.values.empty()) d.fiber1 = f0.values[0];
  if (d.second) {
    const auto f1 = fiber::fiber_convergence(1, perimeter, kInfinity, alpha, elements);
    if (!f1.values.empty()) d.fiber2 = f1.values[0];
  }
  return d;
}

CaseResult second_eigenvalue_case(const NamedCurve& curve, const DiskData& disk, const ExperimentConfig& config) {
  if (!disk.second) {
    throw SecondBoundStateAbsent(
        fmt::format("the disk of curvature {} has no second bound state at alpha = {}", config.kappa_cap, disk.alpha));
  }
  const double alpha = disk.alpha;
  CaseResult c;
  c.curve_id = curve.id;
  c.length = curve.profile.length();
  c.width = kInfinity;
  const auto built = quadrature_curve(curve.profile);
  const auto stats = geometry::curvature_stats(built);
  c.kappa_max = stats.max_kappa;

  const auto sw = transplant::sandwich(curve.id, built, alpha, disk.profiles);
  const auto gap = transplant::perimeter_gap(built, config.kappa_cap);
  c.ru = sw.ru;
  c.rv = sw.rv;
  c.bound = sw.bound;
  c.lambda_disk1 = disk.lambda1;
  c.lambda_disk2 = disk.lambda2;

  auto prob = strip_problem(curve, kInfinity, alpha, config.mesh, disk.truncation);
  const auto rep = strip::convergence_report(prob, config.mesh.levels, 2);
  const auto& ext = rep.extrapolated;
  double l2 = 0.0, l2_err = 0.0;
  if (!ext.empty()) c.lambda1 = ext[0].value;
  if (ext.size() >= 2) {
    l2 = ext[1].value;
    l2_err = ext[1].errbar;
  } else {
    c.note = "no second eigenvalue below the essential spectrum; lambda2 = 0";
  }
  c.lambda2 = l2;
  const double errbar = l2_err + disk.fiber2.errbar + sw.quadrature_tolerance;
  c.errbar = errbar;

  const bool congruent = is_circle(curve.profile) &&
                         std::abs(curve.profile.length() * config.kappa_cap - kTwoPi) <= 1e-12 * kTwoPi;
  c.verdict = compare(l2, *disk.lambda2, errbar);
  if (congruent) c.note = "congruent";
  const bool lower_ok = l2 - l2_err <= sw.bound + sw.quadrature_tolerance;
  const double strict_gap = sw.lambda2_disk - sw.bound;
  const bool strict_ok = congruent || strict_gap > 10 * sw.quadrature_tolerance;
  c.details = {{"sandwich", transplant::to_json(sw)},
               {"sandwich_lower_ok", lower_ok},
               {"strict_gap", strict_gap},
               {"strict_ok", strict_ok},
               {"congruent", congruent},
               {"lambda2_disk_discrete", sw.lambda2_disk},
               {"perimeter_gap", {{"L", gap.length}, {"L0", gap.disk_length}, {"gap", gap.gap}, {"gap_curvature", gap.gap_curvature}}},
               {"disk_fiber", {{"lambda1", disk.fiber1.value}, {"lambda1_errbar", disk.fiber1.errbar},
                               {"lambda2", disk.fiber2.value}, {"lambda2_errbar", disk.fiber2.errbar}}},
               {"strip", strip_details(rep)}};
  return c;
}

std::vector<Job> second_eigenvalue_jobs(const ExperimentConfig& config, std::map<double, DiskData>& disks,
                                        std::size_t& index) {
  std::vector<Job> jobs;
  for (double alpha : config.alphas) disks.emplace(alpha, disk_data(config.kappa_cap, alpha, config.mesh));
  for (const auto& curve : config.curves) {
    for (double alpha : config.alphas) {
      const DiskData* disk = &disks.at(alpha);
      jobs.push_back({make_id(index++, curve.id, alpha), curve.id, alpha, kInfinity,
                      [&curve, disk, &config] { return second_eigenvalue_case(curve, *disk, config); }});
    }
  }
  return jobs;
}

json disk_table(const std::map<double, DiskData>& disks, double kappa_cap) {
  json rows = json::array();
  for (const auto& [alpha, d] : disks) {
    rows.push_back({{"alpha", alpha},
                    {"kappa_cap", kappa_cap},
                    {"lambda1", d.lambda1 ? json(*d.lambda1) : json(nullptr)},
                    {"lambda2", d.lambda2 ? json(*d.lambda2) : json(nullptr)},
                    {"truncation", d.truncation},
                    {"profiles", d.profiles.source}});
  }
  return rows;
}

json check(const std::string& name, bool passed, json details = json::object()) {
  return {{"name", name}, {"passed", passed}, {"details", std::move(details)}};
}

// --- oracle suite pieces --------------------------------------------------------

CaseResult oracle_case(double value, double reference, double tolerance, bool relative, const std::string& quantity) {
  CaseResult c;
  const double err = relative ? std::abs(value - reference) / std::abs(reference) : std::abs(value - reference);
  c.lambda1 = value;
  c.lambda_disk1 = reference;
  c.verdict = err <= tolerance ? verdict::kPass : verdict::kFail;
  c.details = {{"quantity", quantity}, {"value", value}, {"reference", reference}, {"error", err},
               {"tolerance", tolerance}, {"relative", relative}};
  return c;
}

CaseResult cross_discretization_case(double width, double alpha, const ExperimentConfig& config) {
  const double perimeter = kTwoPi;
  const std::size_t elements = config.mesh.scaled_fiber_elements();
  std::vector<double> reference;
  double truncation = 0.0;
  if (std::isinf(width)) {
    const auto f1 = fiber::solve_exterior_fiber(1, perimeter, alpha, elements);
    const auto f0 = fiber::solve_exterior_fiber(0, perimeter, alpha, elements, 1, {}, f1.truncation);
    truncation = std::max(f0.truncation, f1.truncation);
    for (int n : {0, 1}) {
      if (auto r = special::secular_oracle(n, 1.0, alpha)) reference.push_back(*r);
    }
  } else {
    for (int n : {0, 1}) reference.push_back(fiber::fiber_convergence(n, perimeter, width, alpha, elements).values[0].value);
    std::sort(reference.begin(), reference.end());
  }
  const std::size_t count = std::isinf(width) ? 3 : 2;
  const auto prob = strip::make_strip_problem(geometry::CurvatureProfile::circle(1.0), width, alpha,
                                              config.mesh.scaled_n_s(), config.mesh.scaled_n_t(), truncation);
  const auto rep = strip::convergence_report(prob, config.mesh.levels, count);

  CaseResult c;
  c.curve_id = "circle-1";
  c.length = perimeter;
  c.width = width;
  bool ok = rep.values.back().size() >= reference.size() && reference.size() >= 2;
  json rows = json::array();
  for (std::size_t q = 0; q < 2 && q < reference.size() && q < rep.values.back().size(); ++q) {
    const double fine = rep.values.back()[q];
    const double err = std::abs(fine - reference[q]) / std::abs(reference[q]);
    const double order = rep.observed_order[q];
    const bool q_ok = err <= 1e-4 && order >= 1.7 && order <= 2.3;
    ok = ok && q_ok;
    rows.push_back({{"index", q + 1}, {"value", fine}, {"reference", reference[q]}, {"relative_error", err},
                    {"observed_order", std::isfinite(order) ? json(order) : json(nullptr)}, {"passed", q_ok}});
    if (q == 0) c.lambda1 = fine, c.lambda_disk1 = reference[q];
    if (q == 1) c.lambda2 = fine, c.lambda_disk2 = reference[q];
  }
  c.verdict = ok ? verdict::kPass : verdict::kFail;
  c.details = {{"quantity", "2-D strip vs fiber on the unit circle"},
               {"tolerance", 1e-4},
               {"order_window", {1.7, 2.3}},
               {"rows", rows},
               {"strip", strip_details(rep)}};
  if (std::isinf(width) && rep.values.back().size() >= 3) {
    const auto& v = rep.values.back();
    c.details["pair_gap"] = std::abs(v[2] - v[1]) / std::abs(v[1]);
  }
  return c;
}

}  // namespace

double second_bound_threshold(double radius, double lo, double hi, double tol) {
  const auto exists = [&](double a) { return special::secular_oracle(1, radius, a).has_value(); };
  if (!exists(lo) || exists(hi)) throw std::invalid_argument("second_bound_threshold: bracket does not straddle the threshold");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (exists(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

RunRecord run_fiber(const ExperimentConfig& config, std::size_t workers) {
  auto record = new_record(config);
  std::vector<Job> jobs;
  std::size_t index = 0;
  const std::size_t elements = config.mesh.scaled_fiber_elements();
  for (double perimeter : config.perimeters) {
    for (double d : config.widths) {
      const std::string id = fmt::format("{}-L{:g}", std::isinf(d) ? "disk" : "annulus", perimeter);
      for (double alpha : config.alphas) {
        jobs.push_back({make_id(index++, id, alpha, d), id, alpha, d, [=, &config] {
                          CaseResult c;
                          c.length = perimeter;
                          c.kappa_max = kTwoPi / perimeter;
                          const auto spec = std::isinf(d) ? fiber::disk_exterior_spectrum(perimeter, alpha, 8, elements)
                                                          : fiber::annulus_spectrum(perimeter, d, alpha, 4, elements,
                                                                                    config.count);
                          json eig = json::array();
                          for (const auto& e : spec.eigenvalues) {
                            eig.push_back({{"mode", e.mode}, {"index", e.index}, {"lambda", e.lambda},
                                           {"multiplicity", e.multiplicity}});
                          }
                          if (!spec.eigenvalues.empty()) c.lambda1 = spec.eigenvalues[0].lambda;
                          if (spec.eigenvalues.size() > 1) c.lambda2 = spec.eigenvalues[1].lambda;
                          c.verdict = verdict::kComputed;
                          if (spec.essential_only) c.note = "no discrete spectrum";
                          c.details = {{"eigenvalues", eig}, {"essential_only", spec.essential_only},
                                       {"truncation", spec.truncation}, {"elements", elements}};
                          return c;
                        }});
      }
    }
  }
  run_jobs(jobs, workers, record);
  return record;
}

RunRecord run_strip(const ExperimentConfig& config, std::size_t workers) {
  auto record = new_record(config);
  std::vector<Job> jobs;
  std::size_t index = 0;
  for (const auto& curve : config.curves) {
    for (double d : config.widths) {
      for (double alpha : config.alphas) {
        jobs.push_back({make_id(index++, curve.id, alpha, d), curve.id, alpha, d, [&curve, d, alpha, &config] {
                          CaseResult c;
                          c.length = curve.profile.length();
                          c.kappa_max = geometry::curvature_stats(quadrature_curve(curve.profile)).max_kappa;
                          const auto prob = strip_problem(curve, d, alpha, config.mesh);
                          const auto rep = strip::convergence_report(prob, config.mesh.levels, config.count);
                          double errbar = 0.0;
                          for (const auto& e : rep.extrapolated) errbar = std::max(errbar, e.errbar);
                          if (!rep.extrapolated.empty()) c.lambda1 = rep.extrapolated[0].value;
                          if (rep.extrapolated.size() > 1) c.lambda2 = rep.extrapolated[1].value;
                          c.errbar = errbar;
                          c.verdict = verdict::kComputed;
                          if (rep.finest.essential_only) c.note = "no discrete spectrum";
                          if (rep.non_monotone_convergence) c.note = "convergence outside the O(h^2) model";
                          c.details = {{"strip", strip_details(rep)}};
                          return c;
                        }});
      }
    }
  }
  run_jobs(jobs, workers, record);
  return record;
}

RunRecord run_theorem1(const ExperimentConfig& config, std::size_t workers) {
  auto record = new_record(config);
  std::vector<Job> jobs;
  std::size_t index = 0;
  const std::size_t elements = config.mesh.scaled_fiber_elements();
  for (const auto& curve : config.curves) {
    for (double d : config.widths) {
      for (double alpha : config.alphas) {
        jobs.push_back({make_id(index++, curve.id, alpha, d), curve.id, alpha, d, [&curve, d, alpha, elements, &config] {
                          CaseResult c;
                          const double length = curve.profile.length();
                          c.length = length;
                          const auto built = quadrature_curve(curve.profile);
                          c.kappa_max = geometry::curvature_stats(built).max_kappa;

                          const auto prob = strip_problem(curve, d, alpha, config.mesh);
                          const auto rep = strip::convergence_report(prob, config.mesh.levels, 1);
                          const auto annulus = fiber::fiber_convergence(0, length, d, alpha, elements);
                          const auto& a = rep.extrapolated.at(0);
                          const auto& b = annulus.values.at(0);

                          const auto& psi = annulus.fine.profiles.at(0);
                          const auto u = transplant::rayleigh_u_star(built, d, alpha, psi);
                          const double identity = std::abs(u.quotient - annulus.fine.values[0]);
                          const double identity_tol = 1e-9 * std::max(1.0, std::abs(annulus.fine.values[0]));

                          // Absolute floor: at α = 0 both sides are zero up to rounding.
                          const double errbar = a.errbar + b.errbar + 1e-10 * std::max(1.0, std::abs(b.value));
                          c.lambda1 = a.value;
                          c.lambda_disk1 = b.value;
                          c.ru = u.quotient;
                          c.errbar = errbar;
                          c.verdict = compare(a.value, b.value, errbar);
                          if (is_circle(curve.profile)) c.note = "congruent";
                          c.details = {{"identity_residual", identity},
                                       {"identity_tolerance", identity_tol},
                                       {"identity_ok", identity <= identity_tol},
                                       {"annulus_discrete", annulus.fine.values[0]},
                                       {"annulus", fiber_details(annulus)},
                                       {"strip", strip_details(rep)}};
                          return c;
                        }});
      }
    }
  }
  run_jobs(jobs, workers, record);
  return record;
}

RunRecord run_theorem2(const ExperimentConfig& config, std::size_t workers) {
  auto record = new_record(config);
  std::map<double, DiskData> disks;
  std::size_t index = 0;
  auto jobs = second_eigenvalue_jobs(config, disks, index);
  run_jobs(jobs, workers, record);
  record.tables["disk"] = disk_table(disks, config.kappa_cap);
  record.tables["second_bound_threshold"] = second_bound_threshold(1.0 / config.kappa_cap);
  return record;
}

RunRecord run_corollary(const ExperimentConfig& config, std::size_t workers) {
  auto record = new_record(config);
  std::map<double, DiskData> disks;
  std::size_t index = 0;
  auto jobs = second_eigenvalue_jobs(config, disks, index);
  run_jobs(jobs, workers, record);
  record.tables["disk"] = disk_table(disks, config.kappa_cap);

  json table = json::array();
  json checks = json::array();
  std::vector<double> perimeters = config.perimeters;
  std::sort(perimeters.begin(), perimeters.end());
  for (double alpha : config.alphas) {
    const auto rows = fiber::lambda2_vs_perimeter(alpha, perimeters, config.mesh.scaled_fiber_elements());
    bool monotone = true;
    double previous = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      // Without a second bound state λ₂ is the bottom of the essential spectrum, 0.
      const double value = rows[i].lambda2.value_or(0.0);
      if (i > 0 && value > previous + 1e-9 * std::max(1.0, std::abs(previous))) monotone = false;
      previous = value;
      table.push_back({{"alpha", alpha},
                       {"L", rows[i].perimeter},
                       {"lambda2", rows[i].lambda2 ? json(*rows[i].lambda2) : json(nullptr)},
                       {"lambda2_minmax", value},
                       {"truncation", rows[i].truncation}});
    }
    checks.push_back(check(fmt::format("lambda2 non-increasing in L, alpha={:g}", alpha), monotone));

    if (config.curves.empty()) continue;
    bool attains = true;
    std::optional<double> family_max;
    for (const auto& c : record.cases) {
      if (c.alpha != alpha || c.verdict == verdict::kAbsent) continue;
      if (c.verdict == verdict::kError || !c.lambda2) {
        attains = false;
        continue;
      }
      family_max = std::max(family_max.value_or(*c.lambda2), *c.lambda2);
      attains = attains && (c.verdict == verdict::kHolds || c.verdict == verdict::kEqual);
    }
    const auto& disk = disks.at(alpha);
    checks.push_back(check(fmt::format("disk attains the family maximum, alpha={:g}", alpha), attains,
                           {{"family_max", family_max ? json(*family_max) : json(nullptr)},
                            {"disk", disk.lambda2 ? json(*disk.lambda2) : json(nullptr)}}));
  }
  record.tables["monotonicity"] = table;
  record.tables["checks"] = checks;
  return record;
}

RunRecord run_oracle_suite(const ExperimentConfig& config, std::size_t workers) {
  auto record = new_record(config);
  std::vector<Job> jobs;
  std::size_t index = 0;
  const std::size_t elements = config.mesh.scaled_fiber_elements();

  for (double alpha : config.alphas) {
    for (int n : {0, 1}) {
      const std::string id = fmt::format("fiber-secular-n{}", n);
      jobs.push_back({make_id(index++, id, alpha), "disk-R1", alpha, kInfinity, [=] {
                        const auto fc = fiber::fiber_convergence(n, kTwoPi, kInfinity, alpha, elements);
                        const auto root = special::secular_oracle(n, 1.0, alpha);
                        CaseResult c;
                        if (root && !fc.values.empty()) {
                          c = oracle_case(fc.values[0].value, *root, 1e-6, true,
                                          fmt::format("extrapolated fiber eigenvalue n={} vs secular root", n));
                          c.errbar = fc.values[0].errbar;
                          c.details["fiber"] = fiber_details(fc);
                        } else {
                          c.verdict = (!root && fc.values.empty()) ? verdict::kPass : verdict::kFail;
                          c.note = root ? "fiber found no bound state" : "no bound state in either";
                          c.details = {{"quantity", fmt::format("bound state n={} absent", n)},
                                       {"secular_root", root ? json(*root) : json(nullptr)},
                                       {"fiber_count", fc.values.size()}};
                        }
                        c.length = kTwoPi;
                        return c;
                      }});
    }
  }
  for (const auto& [width, alpha] : std::vector<std::pair<double, double>>{{0.5, -1.0}, {kInfinity, -2.0}, {kInfinity, -4.0}}) {
    jobs.push_back({make_id(index++, "strip-vs-fiber", alpha, width), "circle-1", alpha, width,
                    [=, &config] { return cross_discretization_case(width, alpha, config); }});
  }
  jobs.push_back({make_id(index++, "dirichlet-limit", 1e6, 0.5), "annulus-L6.28319", 1e6, 0.5, [=] {
                    fiber::FiberProblem p;
                    p.perimeter = kTwoPi;
                    p.width = 0.5;
                    p.alpha = 1e6;
                    p.mesh = fiber::GradedMesh::for_robin(0.5, elements, 1e6, false);
                    const auto robin = fiber::solve_fiber(p, 1);
                    p.inner = p.outer = fiber::BoundaryKind::Dirichlet;
                    const auto dirichlet = fiber::solve_fiber(p, 1);
                    auto c = oracle_case(robin.values.at(0), dirichlet.values.at(0), 1e-3, true,
                                         "Robin fiber at alpha=1e6 vs Dirichlet fiber");
                    c.length = kTwoPi;
                    return c;
                  }});
  jobs.push_back({make_id(index++, "half-line-secular", -1.0), "disk-R100", -1.0, kInfinity, [] {
                    const auto root = special::secular_oracle(0, 100.0, -1.0);
                    if (!root) throw std::runtime_error("secular equation has no root at R=100, alpha=-1");
                    auto c = oracle_case(*root, -1.0, 0.05, false, "disk R=100 lambda1 vs -alpha^2");
                    c.length = kTwoPi * 100;
                    return c;
                  }});
  jobs.push_back({make_id(index++, "half-line-fiber", -1.0), "disk-R100", -1.0, kInfinity, [=] {
                    const auto f = fiber::solve_exterior_fiber(0, kTwoPi * 100, -1.0, elements);
                    auto c = oracle_case(f.values.at(0), -1.0, 0.05, false, "fiber R=100 lambda1 vs -alpha^2");
                    c.length = kTwoPi * 100;
                    return c;
                  }});
  for (double alpha : {0.0, 0.5, -0.25, -0.5, -2.0}) {
    jobs.push_back({make_id(index++, "discrete-spectrum", alpha), "disk-R1", alpha, kInfinity, [=] {
                      const auto spec = fiber::disk_exterior_spectrum(kTwoPi, alpha, 8, elements);
                      CaseResult c;
                      c.length = kTwoPi;
                      const bool expect_empty = alpha >= 0;
                      const bool ok = expect_empty ? (spec.essential_only && spec.eigenvalues.empty())
                                                   : !spec.eigenvalues.empty();
                      c.verdict = ok ? verdict::kPass : verdict::kFail;
                      if (!spec.eigenvalues.empty()) c.lambda1 = spec.eigenvalues[0].lambda;
                      if (spec.eigenvalues.size() > 1) c.lambda2 = spec.eigenvalues[1].lambda;
                      c.note = spec.essential_only ? "no discrete spectrum" : "";
                      c.details = {{"quantity", expect_empty ? "no discrete eigenvalues" : "at least one eigenvalue"},
                                   {"count", spec.eigenvalues.size()}};
                      return c;
                    }});
  }
  jobs.push_back({make_id(index++, "second-bound-threshold", -1.0), "disk-R1", -1.0, kInfinity, [] {
                    auto c = oracle_case(second_bound_threshold(1.0), -1.0, 1e-6, false,
                                         "alpha below which n=1 binds, vs -1/R");
                    c.length = kTwoPi;
                    return c;
                  }});
  run_jobs(jobs, workers, record);
  return record;
}

RunRecord run_experiment(const ExperimentConfig& config, std::size_t workers) {
  switch (config.kind) {
    case ExperimentKind::Fiber: return run_fiber(config, workers);
    case ExperimentKind::Strip: return run_strip(config, workers);
    case ExperimentKind::Theorem1: return run_theorem1(config, workers);
    case ExperimentKind::Theorem2: return run_theorem2(config, workers);
    case ExperimentKind::Corollary: return run_corollary(config, workers);
    case ExperimentKind::Oracle: return run_oracle_suite(config, workers);
  }
  throw ConfigError("unknown experiment kind");
}

}  // namespace robin::harness
