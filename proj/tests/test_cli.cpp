#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

const fs::path& work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "vdsa_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = work_dir() / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

Result run(const std::string& args, const std::string& env = "") {
  const char* cli = std::getenv("VDSA_CLI");
  REQUIRE_MESSAGE(cli != nullptr, "VDSA_CLI must point at the CLI binary");
  const fs::path out = work_dir() / "stdout.txt";
  const fs::path err = work_dir() / "stderr.txt";
  const std::string cmd = "cd '" + work_dir().string() + "' && " + env + " '" + cli + "' " + args + " > '" +
                          out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

const char* kSmallBounds =
    "id = budget8\n"
    "betas = 0.2, 0.35, 0.6, 0.8\n"
    "N = 8\n"
    "iterations = 4\n"
    "runs = 500\n";

}  // namespace

TEST_CASE("help documents every flag on every subcommand") {
  const auto top = run("--help");
  CHECK(top.code == 0);
  for (const char* sub : {"bounds", "sweep", "memory", "trace", "platoon", "oracle"}) {
    CHECK(top.out.find(sub) != std::string::npos);
  }
  for (const char* sub : {"bounds", "sweep", "memory", "trace synth", "trace validate", "platoon", "oracle"}) {
    CAPTURE(sub);
    const auto h = run(std::string(sub) + " --help");
    CHECK(h.code == 0);
    for (const char* flag : {"--config", "--seed", "--out", "--workers", "--paper-scale", "--verbose"}) {
      CAPTURE(flag);
      CHECK(h.out.find(flag) != std::string::npos);
    }
  }
}

TEST_CASE("unknown flags and subcommands are errors") {
  const auto cfg = write_file("small.cfg", kSmallBounds);
  CHECK(run("bounds --config '" + cfg.string() + "' --bogus").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("").code == 2);
}

TEST_CASE("bounds writes curves and a manifest") {
  const auto cfg = write_file("small.cfg", kSmallBounds);
  const auto r = run("bounds --config '" + cfg.string() + "' --seed 7 --out out/");
  CHECK(r.code == 0);
  CHECK(fs::exists(work_dir() / "out" / "budget8_curves.csv"));
  CHECK(fs::exists(work_dir() / "out" / "budget8_samples.csv"));
  CHECK(fs::exists(work_dir() / "out" / "budget8_manifest.json"));
  const std::string manifest = slurp(work_dir() / "out" / "budget8_manifest.json");
  for (const char* key : {"experiment_id", "config_hash", "seeds", "git_describe", "files"}) {
    CHECK(manifest.find(key) != std::string::npos);
  }
}

TEST_CASE("runs are deterministic and independent of workers") {
  const auto cfg = write_file("small.cfg", kSmallBounds);
  REQUIRE(run("bounds --config '" + cfg.string() + "' --seed 5 --out d1").code == 0);
  REQUIRE(run("bounds --config '" + cfg.string() + "' --seed 5 --workers 3 --out d2").code == 0);
  REQUIRE(run("bounds --config '" + cfg.string() + "' --seed 6 --out d3").code == 0);
  const fs::path d = work_dir();
  CHECK(slurp(d / "d1/budget8_curves.csv") == slurp(d / "d2/budget8_curves.csv"));
  CHECK(slurp(d / "d1/budget8_manifest.json") == slurp(d / "d2/budget8_manifest.json"));
  CHECK(slurp(d / "d1/budget8_curves.csv") != slurp(d / "d3/budget8_curves.csv"));
}

TEST_CASE("missing config file exits 2 and names the path") {
  const auto r = run("bounds --config figs/missing.cfg");
  CHECK(r.code == 2);
  CHECK(r.err.find("figs/missing.cfg") != std::string::npos);
}

TEST_CASE("bad config content exits 2") {
  const auto unknown = write_file("unknown.cfg", std::string(kSmallBounds) + "colour = blue\n");
  const auto r = run("bounds --config '" + unknown.string() + "' --out o");
  CHECK(r.code == 2);
  CHECK(r.err.find("colour") != std::string::npos);
  const auto bad = write_file("bad.cfg", "N = eight\n");
  CHECK(run("bounds --config '" + bad.string() + "' --out o").code == 2);
  const auto gamma = write_file("gamma.cfg", "gammas = 1\niterations = 2\nruns = 10\n");
  CHECK(run("bounds --config '" + gamma.string() + "' --out o").code == 2);
}

TEST_CASE("capacity guard exits 3 and names the iteration") {
  const auto cfg = write_file("capped.cfg",
                              "betas = 0.2, 0.35, 0.6, 0.8\nN = 6\niterations = 20\nenumeration_cap = 1000\nruns = 10\n");
  const auto r = run("bounds --config '" + cfg.string() + "' --paper-scale --out o");
  CHECK(r.code == 3);
  CHECK(r.err.find("iteration 4") != std::string::npos);
}

TEST_CASE("output directory that cannot be created exits 4") {
  const auto cfg = write_file("small.cfg", kSmallBounds);
  write_file("blocker", "not a directory");
  CHECK(run("bounds --config '" + cfg.string() + "' --out blocker/sub").code == 4);
}

TEST_CASE("VDSA_OUT_DIR sets the default output root") {
  const auto cfg = write_file("small.cfg", kSmallBounds);
  const auto r = run("bounds --config '" + cfg.string() + "'", "VDSA_OUT_DIR=envout");
  CHECK(r.code == 0);
  CHECK(fs::exists(work_dir() / "envout" / "budget8_curves.csv"));
}

TEST_CASE("oracle reports the exact success probability") {
  const auto cfg = write_file("oracle.cfg", "betas = 0.2, 0.8\ncumulative = 1, 1\n");
  const auto r = run("oracle --config '" + cfg.string() + "' --out o");
  CHECK(r.code == 0);
  CHECK(r.out.find("exact 0.8") != std::string::npos);
  CHECK(fs::exists(work_dir() / "o" / "oracle_oracle.csv"));
  const auto big = write_file("big.cfg", "betas = 0.2, 0.8\ncumulative = 2000, 2000\nguard = 100\n");
  CHECK(run("oracle --config '" + big.string() + "' --out o").code == 3);
}

TEST_CASE("trace synth and validate") {
  const auto cfg = write_file("trace.cfg", "id = t1\nduration_s = 5\n");
  const auto r = run("trace synth --config '" + cfg.string() + "' --seed 3 --out traces");
  CHECK(r.code == 0);
  const fs::path trace = work_dir() / "traces" / "t1.csv";
  REQUIRE(fs::exists(trace));
  const auto v = run("trace validate '" + trace.string() + "'");
  CHECK(v.code == 0);
  CHECK(v.out.find("50 steps") != std::string::npos);

  const auto bad = write_file("bad_trace.csv", "t,beta_1,beta_2\n0,0.1,0.2\n0.1,1.2,0.3\n");
  const auto b = run("trace validate '" + bad.string() + "'");
  CHECK(b.code == 2);
  CHECK(b.err.find("line 3") != std::string::npos);
  CHECK(run("trace validate missing.csv").code == 4);
  CHECK(run("trace").code == 2);
}

TEST_CASE("memory and platoon subcommands run") {
  const auto mem = write_file("mem.cfg",
                              "id = mem\nseeds = 2\ntraces = 2\nwindow_J = 2\nvehicle_density = 0\n"
                              "rsu_positions_km =\nrsu_channels =\nbaselines = 0.3,0.05,0.6,0.9\nduration_s = 10\n");
  CHECK(run("memory --config '" + mem.string() + "' --out m").code == 0);
  CHECK(fs::exists(work_dir() / "m" / "mem_rates.csv"));
  CHECK(fs::exists(work_dir() / "m" / "mem_selection.csv"));

  const auto plat = write_file("plat.cfg", "id = plat\nruns = 2\nduration_s = 10\nmemory_model = swa\nswa_K = 3\n");
  CHECK(run("platoon --config '" + plat.string() + "' --out p").code == 0);
  CHECK(fs::exists(work_dir() / "p" / "plat_runs.csv"));
  const auto badmem = write_file("badmem.cfg", "memory_model = lstm\n");
  CHECK(run("platoon --config '" + badmem.string() + "' --out p").code == 2);
}

TEST_CASE("sweep subcommand runs on a tiny configuration") {
  const auto cfg = write_file("sweep.cfg",
                              "id = sw\nconfigurations = 3,3\nbeta_sets = 2\ngammas = -2\nhorizon = 30\nruns = 200\n");
  CHECK(run("sweep --config '" + cfg.string() + "' --out s").code == 0);
  CHECK(fs::exists(work_dir() / "s" / "sw_entries.csv"));
  CHECK(fs::exists(work_dir() / "s" / "sw_cdf.csv"));
  const auto bad = write_file("badsweep.cfg", "configurations = 1,3\n");
  CHECK(run("sweep --config '" + bad.string() + "' --out s").code == 2);
}
