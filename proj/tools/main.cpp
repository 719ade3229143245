#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pipeline.hpp"
#include "sphmean/error.hpp"

namespace pl = sphmean::pipeline;

int main(int argc, char** argv) {
  CLI::App app{"sphmean: spherical means, wave traces and half-space inversion"};
  app.require_subcommand(1);

  std::string config_file;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
  bool print_config = false;

  using Stage = pl::StageResult (*)(const nlohmann::json&, const std::filesystem::path&);
  const std::vector<std::pair<std::string, std::pair<std::string, Stage>>> stages = {
      {"phantom", {"sample the phantom", pl::run_phantom}},
      {"forward", {"spherical means and wave trace", pl::run_forward}},
      {"invert", {"reconstruct from the wave trace", pl::run_invert}},
      {"verify", {"identity, range, decay, multiplier and oracle checks", pl::run_verify}},
      {"report", {"collect the stage reports", pl::run_report}},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, info] : stages) {
    CLI::App* sub = app.add_subcommand(name, info.first);
    sub->add_option("--config", config_file, "JSON config (merged over the defaults)")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "working directory")->capture_default_str();
    sub->add_option("--set", overrides, "override a config key, e.g. grid.t_max=12");
    sub->add_flag("--print-config", print_config, "print the resolved config and exit");
    subs.push_back(sub);
  }
  CLI11_PARSE(app, argc, argv);

  try {
    const nlohmann::json cfg = pl::load_config(config_file, overrides);
    if (print_config) {
      std::printf("%s\n", cfg.dump(2).c_str());
      return 0;
    }
    for (std::size_t k = 0; k < subs.size(); ++k) {
      if (!subs[k]->parsed()) continue;
      const pl::StageResult r = stages[k].second.second(cfg, out_dir);
      std::printf("%s\n", r.summary.dump(2).c_str());
      if (!r.pass) {
        std::fprintf(stderr, "%s: threshold not met\n", stages[k].first.c_str());
        return 2;
      }
    }
    return 0;
  } catch (const sphmean::Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", std::string(sphmean::to_string(e.code())).c_str(), e.what());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
  }
  return 1;
}
