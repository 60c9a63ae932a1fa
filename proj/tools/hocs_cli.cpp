// Command-line entry point.
//
// Subcommands: simulate, predict, oracle, image, validate.
// Exit status: 0 success, 1 validation failure, 2 configuration error,
// 3 I/O error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hocs/acceptance.hpp"
#include "hocs/analytic.hpp"
#include "hocs/cache.hpp"
#include "hocs/config.hpp"
#include "hocs/engine.hpp"
#include "hocs/experiments.hpp"
#include "hocs/io.hpp"
#include "hocs/oracle.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string resume_path;
  int workers = 0;                 // 0 = use config value
  std::optional<std::uint64_t> seed;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw hocs::IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

hocs::RunConfig load_run_config(const CommonArgs& args) {
  hocs::RunConfig cfg = hocs::parse_config(read_file(args.config_path));
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  if (args.workers > 0) cfg.workers = args.workers;
  if (args.seed) cfg.seed = *args.seed;
  return cfg;
}

std::string out_path(const hocs::RunConfig& cfg, const std::string& file) {
  return (std::filesystem::path(cfg.output_dir) / file).string();
}

void run_ghost(const hocs::RunConfig& cfg) {
  auto res = hocs::run_ghost_imaging(cfg.layout, *cfg.object, cfg.ghost.mode, cfg.samples,
                                     cfg.seed, cfg.workers, cfg.chunk_size,
                                     cfg.ghost.estimator, cfg.ghost.threshold_fraction);
  hocs::write_text_file(out_path(cfg, "image.csv"), hocs::ghost_csv(res));
  hocs::write_json_file(out_path(cfg, "summary.json"), hocs::ghost_summary(res));
}

int command_simulate(const CommonArgs& args) {
  hocs::RunConfig cfg = load_run_config(args);
  switch (cfg.scenario) {
    case hocs::Scenario::Ghz: {
      auto rep = hocs::run_ghz_scenario(cfg.layout, cfg.samples, cfg.seed, cfg.workers,
                                        cfg.chunk_size);
      hocs::write_text_file(out_path(cfg, "g3_slice.csv"), hocs::ghz_csv(rep));
      hocs::write_json_file(out_path(cfg, "summary.json"), hocs::ghz_summary(rep));
      break;
    }
    case hocs::Scenario::W: {
      auto rep =
          hocs::run_w_scenario(cfg.layout, cfg.samples, cfg.seed, cfg.workers, cfg.chunk_size);
      hocs::write_text_file(out_path(cfg, "w_scan.csv"), hocs::w_csv(rep));
      hocs::write_json_file(out_path(cfg, "summary.json"), hocs::w_summary(rep));
      break;
    }
    case hocs::Scenario::NOrder: {
      auto rep = hocs::run_norder_scenario(cfg.layout, cfg.samples, cfg.seed, cfg.workers,
                                           cfg.chunk_size);
      hocs::write_text_file(out_path(cfg, "gN_slice.csv"), hocs::norder_csv(rep));
      hocs::write_json_file(out_path(cfg, "summary.json"), hocs::norder_summary(rep));
      break;
    }
    case hocs::Scenario::Ghost:
      run_ghost(cfg);
      break;
    case hocs::Scenario::Custom: {
      std::string fp = hocs::config_fingerprint(cfg);
      hocs::EnsembleSpec spec{cfg.layout, cfg.mode, hocs::RngPolicy{cfg.seed}, cfg.samples,
                              cfg.alphabet_size};
      hocs::MomentAccumulator acc;
      if (!args.resume_path.empty() && std::filesystem::exists(args.resume_path)) {
        auto cache = hocs::load_cache(args.resume_path, cfg, cfg.plan);
        acc = hocs::run_ensemble(spec, cfg.plan, cfg.workers, fp, &cache.accumulator);
      } else {
        acc = hocs::run_ensemble(spec, cfg.plan, cfg.workers, fp);
      }
      if (!args.resume_path.empty()) hocs::save_cache(acc, cfg, args.resume_path);
      auto est = hocs::normalized_g(acc, cfg.plan);
      nlohmann::json summary;
      summary["samples"] = acc.sample_count;
      for (const auto& te : est.targets) {
        hocs::write_text_file(out_path(cfg, te.name + ".csv"), hocs::target_csv(te, "x_m"));
        std::size_t pk = std::max_element(te.g.begin(), te.g.end()) - te.g.begin();
        summary["targets"][te.name] = {{"peak_value", te.g[pk]},
                                       {"peak_position_m", te.axis.empty() ? 0.0 : te.axis[pk]}};
      }
      hocs::write_json_file(out_path(cfg, "summary.json"), summary);
      break;
    }
  }
  return kExitOk;
}

int command_predict(const CommonArgs& args) {
  hocs::RunConfig cfg = load_run_config(args);
  nlohmann::json summary;
  switch (cfg.scenario) {
    case hocs::Scenario::Ghz: {
      const auto& axis = cfg.grids[2].positions;
      std::vector<double> g(axis.size());
      for (std::size_t q = 0; q < axis.size(); ++q)
        g[q] = hocs::predicted_g3_ghz(0.0, 0.0, axis[q], cfg.layout);
      hocs::write_text_file(out_path(cfg, "predicted.csv"),
                            hocs::render_csv({{"x3_m", &axis}, {"g3_predicted", &g}}));
      summary["peak_value"] = hocs::predicted_g3_ghz(0.0, 0.0, 0.0, cfg.layout);
      summary["correlation_width_m"] = cfg.layout.correlation_width(2);
      break;
    }
    case hocs::Scenario::W: {
      const auto& axis = cfg.grids[2].positions;
      std::vector<double> g2(axis.size()), g3(axis.size());
      for (std::size_t q = 0; q < axis.size(); ++q) {
        g2[q] = hocs::predicted_g2_w(0.0, axis[q], 1, 2, cfg.layout, true);
        g3[q] = hocs::predicted_g3_w(0.0, 0.0, axis[q], cfg.layout);
      }
      hocs::write_text_file(
          out_path(cfg, "predicted.csv"),
          hocs::render_csv({{"x3_m", &axis}, {"g2_predicted", &g2}, {"g3_predicted", &g3}}));
      summary["g2_coincidence"] = hocs::predicted_g2_w(0.0, 0.0, 1, 2, cfg.layout, true);
      summary["g3_coincidence"] = hocs::predicted_g3_w(0.0, 0.0, 0.0, cfg.layout);
      break;
    }
    case hocs::Scenario::NOrder: {
      const int N = cfg.layout.arm_count;
      const auto& axis = cfg.grids[N - 1].positions;
      std::vector<double> g(axis.size());
      for (std::size_t q = 0; q < axis.size(); ++q) {
        std::vector<double> pos(N, 0.0);
        pos[N - 1] = axis[q];
        g[q] = hocs::quadrature_gn_ghz(pos, cfg.layout);
      }
      hocs::write_text_file(out_path(cfg, "predicted.csv"),
                            hocs::render_csv({{"xN_m", &axis}, {"gN_predicted", &g}}));
      summary["peak_value"] = hocs::quadrature_gn_ghz(std::vector<double>(N, 0.0), cfg.layout);
      break;
    }
    case hocs::Scenario::Ghost: {
      const auto& axis = cfg.grids[2].positions;
      double mag = cfg.ghost.mode == hocs::GhostMode::FixedX2ScanX3
                       ? cfg.layout.distances[2] / cfg.layout.distances[0]
                       : 1.0;
      std::vector<double> expected;
      for (const auto& p : cfg.object->points) expected.push_back(p.position * mag);
      std::sort(expected.begin(), expected.end());
      summary["magnification"] = mag;
      summary["expected_peaks_m"] = expected;
      std::vector<double> none(axis.size(), 1.0);
      hocs::write_text_file(out_path(cfg, "predicted.csv"),
                            hocs::render_csv({{"x_m", &axis}, {"baseline", &none}}));
      break;
    }
    case hocs::Scenario::Custom:
      throw hocs::ConfigError("config error at 'scenario': predict has no closed form for "
                              "custom plans; use ghz/w/norder/ghost");
  }
  hocs::write_json_file(out_path(cfg, "predicted.json"), summary);
  return kExitOk;
}

int command_oracle(const CommonArgs& args) {
  hocs::RunConfig cfg = load_run_config(args);
  if (cfg.plan.targets.empty())
    throw hocs::ConfigError("config error at 'targets': oracle needs an explicit target list");
  hocs::DiscreteAlphabet alphabet{cfg.alphabet_size > 0 ? cfg.alphabet_size : 8};
  auto exact = hocs::exact_correlation(cfg.mode, cfg.layout, alphabet, cfg.plan);
  nlohmann::json summary;
  summary["enumeration_count"] = exact.enumeration_count;
  summary["alphabet_size"] = alphabet.size;
  for (std::size_t ti = 0; ti < cfg.plan.targets.size(); ++ti) {
    const auto& tr = exact.targets[ti];
    const std::string& name = cfg.plan.targets[ti].name;
    std::vector<double> zeros(tr.g.size(), 0.0);
    hocs::write_text_file(
        out_path(cfg, name + ".csv"),
        hocs::render_csv({{"x_m", &tr.axis}, {"g", &tr.g}, {"stderr", &zeros}}));
    summary["targets"][name] = tr.g;
  }
  hocs::write_json_file(out_path(cfg, "oracle.json"), summary);
  return kExitOk;
}

int command_image(const CommonArgs& args) {
  hocs::RunConfig cfg = load_run_config(args);
  if (!cfg.object)
    throw hocs::ConfigError("config error at 'object': image requires an object");
  run_ghost(cfg);
  return kExitOk;
}

int command_validate(const CommonArgs& args) {
  int workers = args.workers > 0 ? args.workers : 4;
  std::string out = args.out_dir.empty() ? std::string("out") : args.out_dir;
  auto results = hocs::run_acceptance(workers, out + "/scratch", std::cout);
  nlohmann::json summary = nlohmann::json::array();
  bool all = true;
  for (const auto& r : results) {
    summary.push_back({{"index", r.index}, {"name", r.name}, {"passed", r.passed},
                       {"detail", r.detail}});
    all = all && r.passed;
  }
  hocs::write_json_file(out + "/validate.json", summary);
  return all ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-order correlation simulator for phase-modulated laser arms"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", args.config_path, "JSON run configuration");
    if (needs_config) opt->required();
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--workers", args.workers, "worker thread count");
    sub->add_option("--resume", args.resume_path, "ensemble cache path for resumable runs");
    sub->add_option("--seed", args.seed, "override the config seed");
  };

  auto* simulate = app.add_subcommand("simulate", "run a Monte Carlo scenario");
  auto* predict = app.add_subcommand("predict", "write closed-form predictions");
  auto* oracle = app.add_subcommand("oracle", "exact enumeration over a discrete alphabet");
  auto* image = app.add_subcommand("image", "run the ghost-imaging experiment");
  auto* validate = app.add_subcommand("validate", "run the acceptance suite");
  add_common(simulate, true);
  add_common(predict, true);
  add_common(oracle, true);
  add_common(image, true);
  add_common(validate, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (simulate->parsed()) return command_simulate(args);
    if (predict->parsed()) return command_predict(args);
    if (oracle->parsed()) return command_oracle(args);
    if (image->parsed()) return command_image(args);
    if (validate->parsed()) return command_validate(args);
  } catch (const hocs::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const hocs::IoError& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  } catch (const hocs::CacheError& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitConfig;
}
