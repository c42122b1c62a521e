#include <sys/wait.h>

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "msl/config.hpp"
#include "msl/emit.hpp"
#include "msl/experiments.hpp"

using namespace msl;

namespace {

std::string parse_error_of(const std::string& text,
                           const std::string& origin = "cfg.toml") {
  try {
    (void)Config::parse_string(text, origin);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t p = hay.find(needle); p != std::string::npos;
       p = hay.find(needle, p + needle.size()))
    ++n;
  return n;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const char* kTinyRates =
    "[experiment]\n"
    "kind = \"rates\"\n"
    "master_seed = 7\n"
    "replications = 24\n"
    "[instance]\n"
    "family = \"single_threshold_realizable\"\n"
    "domain_lo = 0.0\n"
    "domain_hi = 1.0\n"
    "cut = 0.5\n"
    "[sweep]\n"
    "axis = \"n\"\n"
    "grid = [16, 32, 64, 128]\n"
    "[procedures]\n"
    "list = [\"target_erm\"]\n";

}  // namespace

TEST_CASE("config parser handles every value kind") {
  const std::string text =
      "top = 1  # key before any section header\n"
      "# full-line comment\r\n"
      "[alpha]\n"
      "flag = true\n"
      "off = false\n"
      "count = -12\n"
      "ratio = 2.5e-3\n"
      "name = \"he said \\\"hi\\\"\\n\\tand a backslash \\\\ too # not a comment\"\n"
      "xs = [1, 2.5, 3]\n"
      "names = [\"a\", \"b\"]\n"
      "empty = []\n"
      "nested = [[1, 2], [3]]\n"
      "\n"
      "[beta.sub-2]\n"
      "x = 4 # trailing comment\n";
  const Config cfg = Config::parse_string(text, "t.toml");
  REQUIRE(cfg.sections().size() == 3);
  CHECK(cfg.sections()[0].name == "");  // implicit top section
  CHECK(cfg.find("", "top")->i == 1);
  const Config::Section* a = cfg.find_section("alpha");
  REQUIRE(a != nullptr);
  CHECK(a->entries.size() == 9);
  CHECK(cfg.find("alpha", "flag")->b == true);
  CHECK(cfg.find("alpha", "off")->b == false);
  CHECK(cfg.find("alpha", "count")->kind == ConfigValue::Kind::Int);
  CHECK(cfg.find("alpha", "count")->i == -12);
  CHECK(cfg.find("alpha", "ratio")->kind == ConfigValue::Kind::Float);
  CHECK(cfg.find("alpha", "ratio")->f == 2.5e-3);
  CHECK(cfg.find("alpha", "name")->s ==
        "he said \"hi\"\n\tand a backslash \\ too # not a comment");
  const ConfigValue* xs = cfg.find("alpha", "xs");
  REQUIRE(xs->items.size() == 3);
  CHECK(xs->items[0].kind == ConfigValue::Kind::Int);
  CHECK(xs->items[1].kind == ConfigValue::Kind::Float);
  CHECK(xs->items[1].f == 2.5);
  CHECK(cfg.find("alpha", "names")->items[1].s == "b");
  CHECK(cfg.find("alpha", "empty")->items.empty());
  const ConfigValue* nested = cfg.find("alpha", "nested");
  REQUIRE(nested->items.size() == 2);
  CHECK(nested->items[0].items.size() == 2);
  CHECK(nested->items[1].items[0].i == 3);
  CHECK(cfg.find("beta.sub-2", "x")->i == 4);
  CHECK(cfg.find("beta.sub-2", "x")->line == 15);
  CHECK(cfg.find("alpha", "missing") == nullptr);
  CHECK(cfg.find_section("gamma") == nullptr);
  CHECK(cfg.raw_text() == text);
  CHECK(cfg.origin() == "t.toml");
  CHECK_NOTHROW(cfg.check_only_sections({"", "alpha", "beta.sub-2"}));
  CHECK_THROWS_AS(cfg.check_only_sections({"alpha"}), ConfigError);
  // numeric promotion and its limits
  CHECK(cfg.find("alpha", "count")->as_number() == -12.0);
  CHECK_THROWS_AS((void)cfg.find("alpha", "name")->as_number(), ConfigError);
}

TEST_CASE("config parse errors carry origin and line") {
  CHECK(contains(parse_error_of("[good]\nx = 1\n[broken\n"), "cfg.toml:3"));
  CHECK(contains(parse_error_of("[s]\njust some words\n"), "cfg.toml:2"));
  CHECK(contains(parse_error_of("[s]\na b = 1\n"), "invalid key name"));
  CHECK(contains(parse_error_of("[s]\nx = nope\n"), "cannot parse value 'nope'"));
  CHECK(contains(parse_error_of("[s]\nx = \"open\n"), "unterminated string"));
  CHECK(contains(parse_error_of("[s]\nx = \"bad \\q escape\"\n"),
                 "unsupported escape"));
  CHECK(contains(parse_error_of("[s]\nx = \"done\" trailing\n"),
                 "text after closing quote"));
  CHECK(contains(parse_error_of("[s]\nx = [1, 2\n"), "unterminated array"));
  CHECK(contains(parse_error_of("[s]\nx = [1,,2]\n"), "empty array element"));
  CHECK(contains(parse_error_of("[s]\nx = 1\nx = 2\n"), "duplicate key 'x'"));
  CHECK(contains(parse_error_of("[s]\nx = 1\n[s]\ny = 2\n"),
                 "duplicate section [s]"));
  CHECK(contains(parse_error_of("[s]\nx =\n"), "missing value"));
  CHECK(contains(parse_error_of("x = 1\n", "other.conf"), "") == true);  // parses
  CHECK_THROWS_AS((void)Config::parse_file("/nonexistent/x.toml"), ConfigError);
}

TEST_CASE("section reader enforces the schema it is given") {
  const Config cfg = Config::parse_string(
      "[run]\n"
      "n = 5\n"
      "rate = 0.5\n"
      "name = \"abc\"\n"
      "on = true\n"
      "xs = [1, 2]\n"
      "mixed = [1, \"two\"]\n"
      "tags = [\"u\", \"v\"]\n",
      "s.toml");
  {
    SectionReader r(cfg, "run", true);
    CHECK(r.present());
    CHECK(r.require_int("n") == 5);
    CHECK(r.get_int("n", 9) == 5);
    CHECK(r.get_int("absent", 9) == 9);
    CHECK(r.require_double("rate") == 0.5);
    CHECK(r.get_double("n", 0.0) == 5.0);  // ints promote
    CHECK(r.require_string("name") == "abc");
    CHECK(r.get_bool("on", false));
    CHECK(r.require_int_array("xs") == std::vector<std::int64_t>{1, 2});
    CHECK(r.require_number_array("xs") == std::vector<double>{1.0, 2.0});
    CHECK(r.get_string_array("tags", {}) == std::vector<std::string>{"u", "v"});
    CHECK_THROWS_WITH_AS((void)r.require_int("rate"),
                         doctest::Contains("expected an integer"), ConfigError);
    CHECK_THROWS_WITH_AS((void)r.get_bool("n", true),
                         doctest::Contains("expected a bool"), ConfigError);
    CHECK_THROWS_WITH_AS((void)r.require_double("name"),
                         doctest::Contains("expected a number"), ConfigError);
    CHECK_THROWS_WITH_AS((void)r.require_int("nope"),
                         doctest::Contains("missing required"), ConfigError);
    CHECK_THROWS_WITH_AS((void)r.require_number_array("mixed"),
                         doctest::Contains("expected a number"), ConfigError);
    CHECK_THROWS_WITH_AS((void)r.require_int_array("mixed"),
                         doctest::Contains("must be an integer"), ConfigError);
    r.finish();  // everything above was consumed
  }
  {
    SectionReader r(cfg, "run", true);
    (void)r.require_int("n");
    CHECK_THROWS_WITH_AS(r.finish(), doctest::Contains("unknown key"), ConfigError);
  }
  {
    SectionReader r(cfg, "extra", false);
    CHECK_FALSE(r.present());
    CHECK(r.get_int("k", 3) == 3);
    CHECK_NOTHROW(r.finish());
  }
  CHECK_THROWS_WITH_AS(SectionReader(cfg, "extra", true),
                       doctest::Contains("missing required section [extra]"),
                       ConfigError);
}

TEST_CASE("config hash is stable and text-sensitive") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  const std::string text = "[a]\nx = 1\n";
  const std::string h = config_hash(Config::parse_string(text));
  CHECK(h.size() == 16);
  for (char c : h) CHECK(std::isxdigit(static_cast<unsigned char>(c)));
  CHECK(h == config_hash(Config::parse_string(text, "elsewhere.toml")));
  // comments are part of the raw text, so they are traceable too
  CHECK(h != config_hash(Config::parse_string(text + "# note\n")));
  char expect[17];
  std::snprintf(expect, sizeof expect, "%016llx",
                (unsigned long long)fnv1a64(text));
  CHECK(h == expect);
}

TEST_CASE("config survives the json round trip") {
  const Config cfg = Config::parse_string(
      "top = true\n"
      "[num]\n"
      "i = 7\n"
      "whole_float = 3.0\n"  // must come back as a float, not an int
      "tiny = 1.25e-11\n"
      "[mix]\n"
      "s = \"quote \\\" slash \\\\ nl \\n tab \\t\"\n"
      "arr = [1, 2.5, \"x\", [true, false]]\n");
  const std::string json = config_to_json_text(cfg);
  CHECK(json == config_to_json_text(cfg));  // rendering is deterministic
  const Config back = config_from_json_text(json);
  REQUIRE(back.sections().size() == cfg.sections().size());
  for (std::size_t s = 0; s < cfg.sections().size(); ++s) {
    const auto& orig = cfg.sections()[s];
    const auto& echo = back.sections()[s];
    CHECK(orig.name == echo.name);
    REQUIRE(orig.entries.size() == echo.entries.size());
    for (std::size_t e = 0; e < orig.entries.size(); ++e) {
      CHECK(orig.entries[e].key == echo.entries[e].key);
      CHECK(value_equal(orig.entries[e].value, echo.entries[e].value));
    }
  }
  CHECK_THROWS_AS((void)config_from_json_text("not json"), ConfigError);
  CHECK_THROWS_AS((void)config_from_json_text("[1, 2]"), ConfigError);
  CHECK_THROWS_AS((void)config_from_json_text("{\"a\": 3}"), ConfigError);
  // kind distinctions that the round trip must not blur
  CHECK_FALSE(value_equal(cfg.find("num", "i") ? *cfg.find("num", "i") : ConfigValue{},
                          *cfg.find("num", "whole_float")));
}

TEST_CASE("rate exponent fit recovers power laws") {
  auto curve = [](double c, double expo, int k) {
    std::vector<FitPoint> pts;
    for (int i = 0; i < k; ++i) {
      const double x = 10.0 * std::pow(2.0, i);
      pts.push_back({x, c * std::pow(x, expo), 0.0});
    }
    return pts;
  };
  std::vector<std::string> warnings;
  RateFit f = fit_rate_exponent(curve(3.0, -1.0, 6), "erm", &warnings);
  CHECK(f.slope == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(f.band == 0.0);
  CHECK(f.points_used == 6);
  CHECK(f.procedure == "erm");
  CHECK(warnings.empty());
  f = fit_rate_exponent(curve(2.7, -0.5, 5), "erm", nullptr);
  CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-9));
  f = fit_rate_exponent(curve(0.4, 0.0, 4), "erm", nullptr);
  CHECK(f.slope == doctest::Approx(0.0).epsilon(1e-9));

  // nonpositive means are excluded, with a warning naming the sweep value
  auto pts = curve(1.0, -1.0, 6);
  pts[2].mean = 0.0;
  f = fit_rate_exponent(pts, "erm", &warnings);
  CHECK(f.points_used == 5);
  CHECK(f.slope == doctest::Approx(-1.0).epsilon(1e-9));
  REQUIRE(warnings.size() == 1);
  CHECK(contains(warnings[0], "erm"));
  CHECK(contains(warnings[0], "excluded"));

  auto few = curve(1.0, -1.0, 4);
  few[0].mean = -1.0;
  CHECK_THROWS_AS((void)fit_rate_exponent(few, "erm", nullptr),
                  std::invalid_argument);
  std::vector<FitPoint> flat(5, FitPoint{16.0, 0.25, 0.0});
  CHECK_THROWS_AS((void)fit_rate_exponent(flat, "erm", nullptr),
                  std::invalid_argument);

  // mild deterministic perturbation: the fit stays near the true exponent and
  // the stderrs open a positive band
  std::vector<FitPoint> noisy;
  for (int i = 0; i < 8; ++i) {
    const double x = 25.0 * std::pow(2.0, i);
    const double m = std::pow(x, -0.7) * (1.0 + 0.02 * std::sin(double(i)));
    noisy.push_back({x, m, 0.02 * m});
  }
  f = fit_rate_exponent(noisy, "erm", nullptr);
  CHECK(std::abs(f.slope + 0.7) <= 0.05);
  CHECK(f.band > 0.0);
}

TEST_CASE("csv cells render at a fixed significant precision") {
  CHECK(format_sig(0.0) == "0");
  CHECK(format_sig(2.5) == "2.5");
  CHECK(format_sig(1.0 / 3.0) == "0.333333333333");
  CHECK(format_sig(1e-9) == "1e-09");
  CHECK(format_sig(123456789012345.0) == "1.23456789012e+14");
  CHECK(format_sig(-0.125) == "-0.125");
  CHECK(parse_format("csv") == EmitFormat::Csv);
  CHECK(parse_format("json") == EmitFormat::Json);
  CHECK(parse_format("svg") == EmitFormat::Svg);
  CHECK_THROWS_AS((void)parse_format("yaml"), ConfigError);
  CHECK(std::string(format_extension(EmitFormat::Json)) == "json");
}

TEST_CASE("rate runs are invariant to the thread count and honor overrides") {
  const Config cfg = Config::parse_string(kTinyRates, "tiny.toml");
  RunOptions one;
  one.threads = 1;
  RunOptions eight;
  eight.threads = 8;
  const RateReport a = run_rate_experiment(cfg, one);
  const RateReport b = run_rate_experiment(cfg, eight);
  CHECK(to_csv(a) == to_csv(b));
  CHECK(to_json_text(a) == to_json_text(b));
  CHECK(to_csv(a) == to_csv(run_rate_experiment(cfg, one)));  // rerun identical
  REQUIRE(a.rows.size() == 4);
  CHECK(a.meta.master_seed == 7);
  CHECK(a.meta.replications == 24);
  CHECK(a.sweep_axis == "n");
  REQUIRE(a.fits.size() == 1);
  // 24 reps is noisy; just pin the sign and sanity of the fitted decay
  CHECK(a.fits[0].slope < -0.5);
  for (const RateRow& r : a.rows) {
    CHECK(r.reps == 24);
    CHECK(r.mean > 0.0);
    CHECK(r.se >= 0.0);
    CHECK(r.procedure == "target_erm");
  }
  // command-line overrides replace the config values and land in the meta
  RunOptions over;
  over.seed = 99;
  over.reps = 8;
  const RateReport c = run_rate_experiment(cfg, over);
  CHECK(c.meta.master_seed == 99);
  CHECK(c.meta.replications == 8);
  CHECK(c.rows[0].reps == 8);
  CHECK(to_csv(c) != to_csv(a));
}

TEST_CASE("rate svg is a structurally sound chart") {
  const Config cfg = Config::parse_string(kTinyRates, "tiny.toml");
  const RateReport rep = run_rate_experiment(cfg, RunOptions{});
  const std::string svg = to_svg(rep);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(contains(svg, "xmlns=\"http://www.w3.org/2000/svg\""));
  CHECK(contains(svg, "</svg>"));
  CHECK(count_occurrences(svg, "<polyline") >= 1);
  CHECK(contains(svg, "target_erm"));
  CHECK(count_occurrences(svg, "<circle") == rep.rows.size());
}

TEST_CASE("golden outputs stay fixed") {
  const char* src = std::getenv("MSL_SRC");
  if (!src) {
    MESSAGE("MSL_SRC not set; skipping golden-file comparison");
    return;
  }
  const std::string root(src);
  {
    const Config cfg = Config::parse_file(root + "/configs/bounds_demo.toml");
    const BoundsReport rep = run_bounds(cfg);
    CHECK(to_csv(rep) == read_file(root + "/tests/golden/bounds_demo.csv"));
    CHECK(to_json_text(rep) == read_file(root + "/tests/golden/bounds_demo.json"));
  }
  {
    const Config cfg = Config::parse_file(root + "/tests/golden/pack_d8.toml");
    const PackReport rep = run_pack(cfg);
    CHECK(rep.distance_verified);
    CHECK(to_csv(rep) == read_file(root + "/tests/golden/pack_d8.csv"));
  }
  {
    const Config cfg = Config::parse_file(root + "/configs/validate_pooling.toml");
    const ValidateReport rep = run_validate(cfg);
    CHECK(rep.ok());
    CHECK(to_csv(rep) == read_file(root + "/tests/golden/validate_pooling.csv"));
  }
}

TEST_CASE("text files are written verbatim") {
  namespace fs = std::filesystem;
  const std::string path = (fs::temp_directory_path() / "msl_emit_probe.txt").string();
  const std::string content = "line one\nline two\twith tab\n# not a comment\n";
  write_text_file(path, content);
  CHECK(read_file(path) == content);
  write_text_file(path, "shorter\n");  // overwrite, no stale tail
  CHECK(read_file(path) == "shorter\n");
  fs::remove(path);
  CHECK_THROWS_AS(write_text_file("/nonexistent_dir_msl/x.txt", "y"),
                  std::runtime_error);
}

TEST_CASE("cli end to end: exit codes and artifacts") {
  namespace fs = std::filesystem;
  const char* bin_env = std::getenv("MSL_BIN");
  const char* src_env = std::getenv("MSL_SRC");
  if (!bin_env || !src_env) {
    MESSAGE("MSL_BIN/MSL_SRC not set; skipping CLI end-to-end checks");
    return;
  }
  const std::string bin(bin_env), src(src_env);
  const fs::path tmp = fs::temp_directory_path() / "msl_cli_probe";
  fs::create_directories(tmp);
  const std::string out = " --out " + tmp.string();
  auto run = [&](const std::string& tail) {
    const std::string cmd = bin + " " + tail + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };

  // 0: a clean validate run writes its report where asked
  CHECK(run("validate --config " + src + "/configs/validate_pooling.toml" + out) == 0);
  CHECK(fs::exists(tmp / "validate.csv"));

  // 2: config problems — unknown key, unsortable bound query, missing file,
  // bad format, svg on a non-chart command, missing subcommand
  const std::string bad_key = (tmp / "bad_key.toml").string();
  write_text_file(bad_key,
                  "[experiment]\nkind = \"pack\"\n[pack]\nd = 8\nbogus = 1\n");
  CHECK(run("pack --config " + bad_key + out) == 2);
  const std::string unsorted = (tmp / "unsorted.toml").string();
  write_text_file(unsorted,
                  "[experiment]\nkind = \"bounds\"\n[query]\nrhos = [2.0, 1.0]\n"
                  "sizes = [10, 10]\n");
  CHECK(run("bounds --config " + unsorted + out) == 2);
  CHECK(run("bounds --config " + tmp.string() + "/absent.toml" + out) == 2);
  CHECK(run("bounds --config " + src + "/configs/bounds_demo.toml" + out +
            " --format yaml") == 2);
  CHECK(run("bounds --config " + src + "/configs/bounds_demo.toml" + out +
            " --format svg") == 2);
  CHECK(run("") == 2);

  // 3: a knowingly wrong declared transfer exponent fails validation,
  // refuses to run, and runs under --force
  const std::string wrong_rho = (tmp / "wrong_rho.toml").string();
  write_text_file(wrong_rho,
                  "[experiment]\nkind = \"validate\"\n[instance]\n"
                  "family = \"asymmetric_pair\"\nbeta = 0.0\nn_P = 1000\nn_D = 11\n"
                  "c2 = 0.08\ndeclared_rho = 1.2\n");
  CHECK(run("validate --config " + wrong_rho + out) == 3);
  const std::string wrong_rho_run = (tmp / "wrong_rho_run.toml").string();
  write_text_file(wrong_rho_run,
                  "[experiment]\nkind = \"asymmetry\"\nmaster_seed = 3\n"
                  "replications = 40\n[instance]\nfamily = \"asymmetric_pair\"\n"
                  "beta = 0.0\nn_P = 1000\nn_D = 11\nc2 = 0.08\n"
                  "declared_rho = 1.2\n");
  CHECK(run("asymmetry --config " + wrong_rho_run + out) == 3);
  CHECK(run("asymmetry --config " + wrong_rho_run + out + " --force") == 0);
  CHECK(fs::exists(tmp / "asymmetry.csv"));

  // 4: runtime faults that are not config or validation problems — here the
  // output directory collides with an existing file
  CHECK(run("bounds --config " + src + "/configs/bounds_demo.toml --out " +
            bad_key) == 4);

  // 0: chart output for a rate sweep
  const std::string tiny = (tmp / "tiny_rates.toml").string();
  write_text_file(tiny, kTinyRates);
  CHECK(run("rates --config " + tiny + out + " --reps 6 --format svg") == 0);
  CHECK(fs::exists(tmp / "rates.svg"));
}
