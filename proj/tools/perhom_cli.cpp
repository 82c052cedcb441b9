#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "perhom/pipeline.hpp"

namespace {

// Exit codes: 0 all checks passed, 1 some check failed, 2 invalid input or stage failure.
int run(const std::string& subcommand, const std::string& config_path, const std::string& out,
        const std::uint64_t* seed, const int* threads) {
  perhom::ExperimentConfig cfg;
  try {
    cfg = config_path.empty() ? perhom::parse_config(nlohmann::json::object()) : perhom::load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  cfg.subcommand = subcommand;
  if (!out.empty()) cfg.out = out;
  if (seed) cfg.seed = *seed;
  if (threads) cfg.threads = *threads;
  try {
    const perhom::PipelineResult res = perhom::run_pipeline(cfg);
    for (const auto& c : res.checks)
      std::cout << (c.pass ? "ok   " : "FAIL ") << c.stage << "/" << c.name << " value=" << c.value
                << " limit=" << c.limit << "\n";
    std::cout << "report: " << cfg.out << "/report.json\n";
    return res.pass ? 0 : 1;
  } catch (const perhom::StageError& e) {
    std::cerr << "stage failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic homogenization experiments for Levy diffusions with distributional drift"};
  app.require_subcommand(1);
  std::string config_path, out;
  std::uint64_t seed = 0;
  int threads = 0;
  for (const char* name : {"enhance", "invariant", "corrector", "diffusivity", "gap", "clt", "pde", "all"}) {
    auto* sub = app.add_subcommand(name, std::string("run the pipeline through the ") + name + " stage");
    sub->add_option("--config", config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--threads", threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  }
  CLI11_PARSE(app, argc, argv);
  const auto* chosen = app.get_subcommands().front();
  const bool has_seed = chosen->count("--seed") > 0;
  const bool has_threads = chosen->count("--threads") > 0;
  return run(chosen->get_name(), config_path, out, has_seed ? &seed : nullptr, has_threads ? &threads : nullptr);
}
