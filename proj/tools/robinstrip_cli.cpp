#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "robin/errors.hpp"
#include "robin/harness/config.hpp"
#include "robin/harness/record.hpp"
#include "robin/harness/runners.hpp"

using namespace robin::harness;

namespace {

struct Options {
  std::string config;
  std::string out = "results";
  std::size_t workers = 1;
  std::optional<double> mesh_scale;
  std::optional<std::uint64_t> seed;
};

nlohmann::json read_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw robin::IoError("cannot open config", path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw robin::ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

int run(ExperimentKind kind, const Options& o) {
  // Overrides go into the raw document so that random families are drawn
  // from the command-line seed.
  nlohmann::json doc = o.config.empty() ? nlohmann::json::object() : read_document(o.config);
  if (o.mesh_scale) doc["mesh"]["scale"] = *o.mesh_scale;
  if (o.seed) doc["seed"] = *o.seed;
  const auto config = parse_config(doc, kind);

  const auto record = run_experiment(config, o.workers);
  const auto dir = emit_outputs(record, o.out);
  std::size_t tally[4] = {0, 0, 0, 0};
  for (const auto& c : record.cases) {
    if (c.verdict == verdict::kFails || c.verdict == verdict::kFail) ++tally[2];
    else if (c.verdict == verdict::kError) ++tally[3];
    else if (c.verdict == verdict::kIndeterminate) ++tally[1];
    else ++tally[0];
  }
  fmt::print("{}: {} cases ({} ok, {} indeterminate, {} failed, {} errors) -> {}\n", to_string(kind),
             record.cases.size(), tally[0], tally[1], tally[2], tally[3], dir.string());
  for (const auto& c : record.cases) {
    if (c.verdict == verdict::kError) fmt::print(stderr, "  {}: {}\n", c.case_id, c.note);
  }
  return exit_code(record);
}

const char* describe(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Fiber: return "disk exterior and annulus spectra by angular fibers";
    case ExperimentKind::Strip: return "2-D strip eigenvalues with a refinement study";
    case ExperimentKind::Theorem1: return "lambda1 of the parallel strip against the annulus";
    case ExperimentKind::Theorem2: return "lambda2 of the exterior against the capped disk";
    case ExperimentKind::Corollary: return "lambda2 of the disk exterior against its perimeter";
    case ExperimentKind::Oracle: return "cross-validation against the secular equation and limits";
  }
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robin eigenvalue experiments on strips and exteriors of planar curves"};
  app.require_subcommand(1);
  Options o;
  for (auto kind : {ExperimentKind::Fiber, ExperimentKind::Strip, ExperimentKind::Theorem1, ExperimentKind::Theorem2,
                    ExperimentKind::Corollary, ExperimentKind::Oracle}) {
    auto* sub = app.add_subcommand(to_string(kind), describe(kind));
    sub->add_option("--config", o.config, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output root")->capture_default_str();
    sub->add_option("--workers", o.workers, "worker threads")->check(CLI::Range(1, 256))->capture_default_str();
    sub->add_option("--mesh-scale", o.mesh_scale, "multiplies every mesh size")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "seed for random curve families");
    sub->callback([kind, &o] {
      int code = 1;
      try {
        code = run(kind, o);
      } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
      }
      throw CLI::RuntimeError(code);
    });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::RuntimeError& e) {
    return e.get_exit_code();
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return 0;
}
