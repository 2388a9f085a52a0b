// qppr: generate graphs, sweep PPR bit-widths, dump convergence curves and
// validate QCOO files.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qppr/experiment.hpp"

namespace {

std::vector<std::string> split_formats(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream in(list);
  std::string token;
  while (std::getline(in, token, ',')) {
    if (!token.empty()) out.push_back(token);
  }
  return out;
}

// Usage errors exit 2, input errors 3, anything else 1.
int exit_code(const qppr::Error& e) {
  switch (e.code()) {
    case qppr::ErrorCode::kInvalidArgument:
    case qppr::ErrorCode::kInvalidParameters:
    case qppr::ErrorCode::kCutoffTooLarge:
      return 2;
    case qppr::ErrorCode::kIo:
    case qppr::ErrorCode::kBadMagic:
    case qppr::ErrorCode::kMalformedLine:
    case qppr::ErrorCode::kEmptyInput:
      return 3;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  namespace ex = qppr::experiment;
  CLI::App app{"Quantized personalized PageRank experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ex::kVersion);

  ex::ExperimentSpec spec;
  std::string formats = "19,21,23,25,f32";
  bool quiet = false;

  auto add_sweep_flags = [&](CLI::App* cmd, int default_iters) {
    spec.iterations = default_iters;
    cmd->add_option("--graph", spec.graph, "gen:PRESET, qcoo:PATH, snap:PATH or a file path")
        ->required();
    cmd->add_option("--formats", formats, "comma list of fractional bits, f32, f64")
        ->capture_default_str();
    cmd->add_option("--kappa", spec.kappa, "requests per batch")->capture_default_str();
    cmd->add_option("--iters", spec.iterations, "PPR iterations")->capture_default_str();
    cmd->add_option("--requests", spec.requests, "random personalization vertices")
        ->capture_default_str();
    cmd->add_option("--seed", spec.seed, "seed for personalization sampling")
        ->capture_default_str();
    cmd->add_option("--out", spec.out, "output directory")->capture_default_str();
    cmd->add_option("--threads", spec.threads, "worker threads")->capture_default_str();
    cmd->add_option("--presets", spec.presets, "generator preset file")->capture_default_str();
    cmd->add_option("--alpha", spec.alpha, "damping factor")->capture_default_str();
    cmd->add_flag("--quiet", quiet, "no progress on stderr");
  };

  auto* run = app.add_subcommand("run", "sweep formats against a float64 golden");
  add_sweep_flags(run, 10);
  run->add_option("--golden-iters", spec.golden_iterations, "golden iterations")
      ->capture_default_str();
  run->add_option("--cutoffs", spec.cutoffs, "top-N cutoffs")->capture_default_str();

  ex::ExperimentSpec conv_spec;
  auto* conv = app.add_subcommand("convergence", "per-iteration step norms");
  conv->add_option("--graph", conv_spec.graph, "gen:PRESET, qcoo:PATH, snap:PATH or a file path")
      ->required();
  std::string conv_formats = "25,f64";
  conv->add_option("--formats", conv_formats, "comma list of fractional bits, f32, f64")
      ->capture_default_str();
  conv_spec.iterations = 30;
  conv->add_option("--kappa", conv_spec.kappa, "requests per batch")->capture_default_str();
  conv->add_option("--iters", conv_spec.iterations, "PPR iterations")->capture_default_str();
  conv->add_option("--requests", conv_spec.requests, "random personalization vertices")
      ->capture_default_str();
  conv->add_option("--seed", conv_spec.seed, "seed for personalization sampling")
      ->capture_default_str();
  conv->add_option("--out", conv_spec.out, "output directory")->capture_default_str();
  conv->add_option("--threads", conv_spec.threads, "worker threads")->capture_default_str();
  conv->add_option("--presets", conv_spec.presets, "generator preset file")->capture_default_str();
  conv->add_option("--alpha", conv_spec.alpha, "damping factor")->capture_default_str();
  conv->add_flag("--quiet", quiet, "no progress on stderr");

  ex::GenerateSpec gen_spec;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("generate", "write a preset graph as QCOO");
  gen->add_option("--graph", gen_spec.preset, "preset name")->required();
  gen->add_option("--out", gen_spec.out, "output directory")->capture_default_str();
  auto* seed_opt = gen->add_option("--seed", gen_seed, "override the preset seed");
  gen->add_option("--presets", gen_spec.presets, "generator preset file")->capture_default_str();
  gen->add_option("--frac-bits", gen_spec.store_frac_bits, "store raw Q1.f weights (0: float64)")
      ->capture_default_str()
      ->check(CLI::Range(0, 62));

  std::string validate_path;
  auto* val = app.add_subcommand("validate", "check a QCOO file");
  val->add_option("--graph,path", validate_path, "QCOO file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      spec.formats = split_formats(formats);
      spec.quiet = quiet;
      ex::cmd_run(spec);
      std::cout << "wrote " << (spec.out / "metrics.csv").string() << '\n';
    } else if (*conv) {
      conv_spec.formats = split_formats(conv_formats);
      conv_spec.quiet = quiet;
      ex::cmd_convergence(conv_spec);
      std::cout << "wrote " << (conv_spec.out / "convergence.csv").string() << '\n';
    } else if (*gen) {
      if (*seed_opt) gen_spec.seed = gen_seed;
      const auto result = ex::cmd_generate(gen_spec);
      std::cout << "wrote " << result.graph_file.string() << " (|V|=" << result.num_vertices
                << ", |E|=" << result.num_arcs << ")\n";
    } else if (*val) {
      const auto report = ex::cmd_validate(validate_path);
      std::cout << report.summary;
      return report.clean() ? 0 : 1;
    }
  } catch (const qppr::Error& e) {
    std::cerr << "qppr: " << qppr::to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "qppr: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
