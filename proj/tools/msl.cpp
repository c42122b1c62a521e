#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "msl/emit.hpp"

namespace {

struct Args {
  std::string config;
  std::string out = ".";
  std::string format = "csv";
  std::uint64_t seed = 0;
  std::int64_t reps = 0;
  int threads = 1;
  bool force = false;
};

std::string output_path(const std::string& out_dir, const std::string& name,
                        msl::EmitFormat f) {
  std::filesystem::create_directories(out_dir);
  return out_dir + "/" + name + "." + msl::format_extension(f);
}

void print_warnings(const std::vector<std::string>& ws) {
  for (const std::string& w : ws) std::cerr << "warning: " << w << "\n";
}

int dispatch(const std::string& cmd, const Args& args, const msl::RunOptions& opts) {
  const msl::Config cfg = msl::Config::parse_file(args.config);
  const msl::EmitFormat fmt = msl::parse_format(args.format);

  if (cmd == "rates" || cmd == "pooling") {
    const msl::RateReport rep = msl::run_rate_experiment(cfg, opts);
    print_warnings(rep.warnings);
    std::string body;
    switch (fmt) {
      case msl::EmitFormat::Csv: body = to_csv(rep); break;
      case msl::EmitFormat::Json: body = to_json_text(rep); break;
      case msl::EmitFormat::Svg: body = to_svg(rep); break;
    }
    const std::string path = output_path(args.out, rep.meta.experiment, fmt);
    msl::write_text_file(path, body);
    for (const msl::RateFit& f : rep.fits)
      std::cout << "fit " << f.procedure << ": slope " << msl::format_sig(f.slope)
                << " (95% band +-" << msl::format_sig(f.band) << ", "
                << f.points_used << " points)\n";
    std::cout << "wrote " << path << "\n";
    return 0;
  }

  if (fmt == msl::EmitFormat::Svg)
    throw msl::ConfigError("svg output is only available for rates and pooling");

  if (cmd == "asymmetry") {
    const msl::AsymmetryReport rep = msl::run_asymmetry_experiment(cfg, opts);
    print_warnings(rep.warnings);
    const std::string path = output_path(args.out, rep.meta.experiment, fmt);
    msl::write_text_file(path,
                         fmt == msl::EmitFormat::Csv ? to_csv(rep) : to_json_text(rep));
    for (const msl::AsymmetryRow& r : rep.rows)
      std::cout << r.learner << ": target excess " << msl::format_sig(r.target_excess_mean)
                << ", source excess " << msl::format_sig(r.source_excess_mean)
                << ", wrong-at-x1 " << msl::format_sig(r.wrong_at_x1_freq) << "\n";
    std::cout << "wrote " << path << "\n";
    return 0;
  }

  if (cmd == "adaptivity") {
    const msl::AdaptivityReport rep = msl::run_adaptivity_experiment(cfg, opts);
    print_warnings(rep.warnings);
    const std::string path = output_path(args.out, rep.meta.experiment, fmt);
    msl::write_text_file(path,
                         fmt == msl::EmitFormat::Csv ? to_csv(rep) : to_json_text(rep));
    for (const msl::AdaptivityRow& r : rep.rows)
      std::cout << r.procedure << ": target excess "
                << msl::format_sig(r.target_excess_mean) << ", wrong-at-x1 "
                << msl::format_sig(r.wrong_at_x1_freq) << "\n";
    if (rep.flip_reps > 0)
      std::cout << "flip probability " << msl::format_sig(rep.flip_freq) << " +- "
                << msl::format_sig(rep.flip_se) << " (floor "
                << msl::format_sig(rep.flip_floor) << ")\n";
    std::cout << "wrote " << path << "\n";
    return 0;
  }

  if (cmd == "validate") {
    const msl::ValidateReport rep = msl::run_validate(cfg);
    print_warnings(rep.warnings);
    const std::string path = output_path(args.out, rep.meta.experiment, fmt);
    msl::write_text_file(path,
                         fmt == msl::EmitFormat::Csv ? to_csv(rep) : to_json_text(rep));
    std::cout << "family " << rep.family << ": shared_optimum "
              << (rep.shared_optimum ? "ok" : "FAIL") << ", transfer "
              << (rep.transfer_ok ? "ok" : "FAIL") << ", bernstein "
              << (rep.bernstein_ok ? "ok" : "FAIL") << "\n";
    if (!rep.ok()) {
      std::cerr << "assumption check failed: " << rep.detail << "\n";
      return 3;
    }
    std::cout << "wrote " << path << "\n";
    return 0;
  }

  if (cmd == "bounds") {
    const msl::BoundsReport rep = msl::run_bounds(cfg);
    const std::string path = output_path(args.out, rep.meta.experiment, fmt);
    msl::write_text_file(path,
                         fmt == msl::EmitFormat::Csv ? to_csv(rep) : to_json_text(rep));
    for (const msl::BoundsRow& r : rep.rows) {
      std::cout << r.name << " = " << msl::format_sig(r.value);
      if (r.argmin_t > 0) std::cout << " (argmin t = " << r.argmin_t << ")";
      std::cout << "\n";
    }
    std::cout << "wrote " << path << "\n";
    return 0;
  }

  if (cmd == "pack") {
    const msl::PackReport rep = msl::run_pack(cfg);
    if (!rep.distance_verified)
      throw std::runtime_error("packing failed its own distance verification");
    const std::string path = output_path(args.out, rep.meta.experiment, fmt);
    msl::write_text_file(path,
                         fmt == msl::EmitFormat::Csv ? to_csv(rep) : to_json_text(rep));
    std::cout << "d = " << rep.d << ": " << rep.vectors.size()
              << " vectors at pairwise distance >= " << rep.min_distance
              << " (verified)\n";
    std::cout << "wrote " << path << "\n";
    return 0;
  }

  throw std::runtime_error("unhandled subcommand " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulation laboratory for multisource transfer learning"};
  app.require_subcommand(1);

  Args args;
  const std::vector<std::pair<std::string, std::string>> cmds = {
      {"rates", "single-task / multitask excess-risk rate sweeps"},
      {"pooling", "pooled-ERM rate sweep over the number of sources"},
      {"asymmetry", "pooled vs source-only vs target-only ERM on the asymmetric pair"},
      {"adaptivity", "pooled vs rank-based on the hard product instances"},
      {"validate", "re-check instance assumptions (shared optimum, transfer, noise)"},
      {"bounds", "evaluate the rate-bound calculators on one query"},
      {"pack", "greedy sign-vector packing with distance verification"}};
  for (const auto& [name, desc] : cmds) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", args.config, "config file path")->required();
    sub->add_option("--seed", args.seed, "override [experiment] master_seed");
    sub->add_option("--reps", args.reps, "override [experiment] replications");
    sub->add_option("--out", args.out, "output directory (default .)");
    sub->add_option("--format", args.format, "csv | json | svg (default csv)");
    sub->add_option("--threads", args.threads, "worker threads (default 1)")
        ->check(CLI::Range(1, 256));
    sub->add_flag("--force", args.force, "run even if assumption checks fail");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  msl::RunOptions opts;
  if (sub->count("--seed")) opts.seed = args.seed;
  if (sub->count("--reps")) opts.reps = args.reps;
  opts.threads = args.threads;
  opts.force = args.force;

  try {
    return dispatch(sub->get_name(), args, opts);
  } catch (const msl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const msl::ValidationFailure& e) {
    std::cerr << "validation failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
