// End-to-end tests of the command-line binary: exit codes, manifest
// pairing, config precedence and byte-identical replay.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qxs/benchmarks.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string stdout_text;
};

class TempDir {
  public:
    TempDir() {
        dir_ = fs::temp_directory_path() /
               fs::path("qxs_cli_" + std::to_string(counter_++));
        fs::create_directories(dir_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }
    fs::path path(const std::string& name) const { return dir_ / name; }
    const fs::path& dir() const { return dir_; }

  private:
    static inline int counter_ = 0;
    fs::path dir_;
};

CliResult run_cli(const TempDir& tmp, const std::string& args) {
    fs::path out = tmp.path("stdout.txt");
    std::string cmd = std::string(QXS_CLI_PATH) + " " + args + " > " +
                      out.string() + " 2> " + tmp.path("stderr.txt").string();
    int raw = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WEXITSTATUS(raw);
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    r.stdout_text = ss.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("usage errors exit 1, bad input exits 2") {
    TempDir tmp;
    CHECK(run_cli(tmp, "").exit_code == 1);
    CHECK(run_cli(tmp, "frobnicate").exit_code == 1);
    CHECK(run_cli(tmp, "bench run").exit_code == 1);  // --out is required
    CHECK(run_cli(tmp, "bench run --circuit nope --out " +
                           tmp.path("x.json").string())
              .exit_code == 2);
    CHECK(run_cli(tmp, "rl map --policy /nonexistent.json --circuit c "
                       "--out " +
                           tmp.path("x.json").string())
              .exit_code == 2);
    CHECK(run_cli(tmp, "replay /nonexistent.manifest.json").exit_code == 2);
}

TEST_CASE("every output file pairs with a manifest describing the run") {
    TempDir tmp;
    fs::path out = tmp.path("counts.json");
    CliResult r = run_cli(tmp, "bench run --circuit grover3 --noise demo "
                               "--shots 512 --seed 11 --out " +
                                   out.string());
    REQUIRE(r.exit_code == 0);
    REQUIRE(fs::exists(out));
    fs::path manifest = out;
    manifest += ".manifest.json";
    REQUIRE(fs::exists(manifest));
    json m = json::parse(slurp(manifest));
    CHECK(m.at("command") == "bench run");
    CHECK(m.at("config").at("circuit") == "grover3");
    CHECK(m.at("config").at("shots") == 512);
    CHECK(m.at("config").at("seed") == 11);
    CHECK(m.at("outputs").at("out") == out.string());
    CHECK(m.at("wall_seconds").get<double>() >= 0.0);
    CHECK(m.contains("version"));
    // No stray temp files once the atomic rename lands.
    CHECK_FALSE(fs::exists(out.string() + ".tmp"));

    qxs::Counts counts = qxs::counts_from_json(slurp(out));
    long long total = 0;
    for (const auto& [bits, n] : counts) total += n;
    CHECK(total == 512);
}

TEST_CASE("explicit flags beat the config file, which beats defaults") {
    TempDir tmp;
    fs::path cfg = tmp.path("cfg.json");
    {
        std::ofstream f(cfg);
        f << R"({"shots": 4096, "seed": 21, "circuit": "grover3:011"})";
    }
    fs::path out = tmp.path("counts.json");
    CliResult r = run_cli(tmp, "bench run --config " + cfg.string() +
                                   " --shots 64 --out " + out.string());
    REQUIRE(r.exit_code == 0);
    json m = json::parse(slurp(out.string() + ".manifest.json"));
    CHECK(m.at("config").at("shots") == 64);            // flag wins
    CHECK(m.at("config").at("seed") == 21);             // file wins
    CHECK(m.at("config").at("circuit") == "grover3:011");
    CHECK(m.at("config").at("noise") == "none");        // default survives
}

TEST_CASE("replay reproduces data outputs byte for byte") {
    TempDir tmp;
    fs::path out = tmp.path("demo.json");
    REQUIRE(run_cli(tmp, "bench attack --target 101 --shots 600 --seed 5 "
                         "--out " +
                             out.string())
                .exit_code == 0);
    fs::path rdir = tmp.path("replayed");
    REQUIRE(run_cli(tmp, "replay " + out.string() + ".manifest.json" +
                             " --out-dir " + rdir.string())
                .exit_code == 0);
    CHECK(slurp(rdir / "demo.json") == slurp(out));
}

TEST_CASE("replay with a different worker count is still byte-identical") {
    TempDir tmp;
    fs::path out = tmp.path("eta.csv");
    REQUIRE(run_cli(tmp, "spectator sweep --tau 3,5 --shots 40 --seed 13 "
                         "--workers 1 --out " +
                             out.string())
                .exit_code == 0);
    fs::path rdir = tmp.path("replayed");
    REQUIRE(run_cli(tmp, "replay " + out.string() + ".manifest.json" +
                             " --out-dir " + rdir.string() + " --workers 4")
                .exit_code == 0);
    CHECK(slurp(rdir / "eta.csv") == slurp(out));
    CHECK(slurp(out).rfind("tau,eta\n", 0) == 0);
}

TEST_CASE("the tomography pipeline runs gen, run and fit end to end") {
    TempDir tmp;
    fs::path suite = tmp.path("suite.json");
    fs::path results = tmp.path("results.json");
    fs::path est = tmp.path("estimate.json");
    REQUIRE(run_cli(tmp, "idt gen --path 4 --driven 1,2 --lengths 1,2 --out " +
                             suite.string())
                .exit_code == 0);
    REQUIRE(run_cli(tmp, "idt run --suite " + suite.string() +
                             " --shots 200 --seed 2 --out " + results.string())
                .exit_code == 0);
    REQUIRE(run_cli(tmp, "idt fit --suite " + suite.string() + " --results " +
                             results.string() + " --out " + est.string())
                .exit_code == 0);
    json doc = json::parse(slurp(est));
    CHECK(doc.contains("qubits"));
    // The suite file the pipeline read is untouched.
    CHECK_FALSE(fs::exists(suite.string() + ".tmp"));
}

TEST_CASE("the mapping pipeline trains a policy and maps a circuit") {
    TempDir tmp;
    fs::path policy = tmp.path("policy.json");
    fs::path curve = tmp.path("curve.csv");
    REQUIRE(run_cli(tmp, "rl train --circuits 20 --batch 10 --hidden 8 "
                         "--actions 4 --seed 2 --out " +
                             policy.string() + " --curve " + curve.string())
                .exit_code == 0);
    CHECK(slurp(curve).rfind("episode,mean_reward\n", 0) == 0);
    // Both outputs carry manifests pointing at the same run.
    json m1 = json::parse(slurp(policy.string() + ".manifest.json"));
    json m2 = json::parse(slurp(curve.string() + ".manifest.json"));
    CHECK(m1.at("config") == m2.at("config"));

    fs::path circuit = tmp.path("circuit.json");
    {
        std::ofstream f(circuit);
        f << qxs::build_benchmark("grover3").to_json();
    }
    fs::path place = tmp.path("placement.json");
    CliResult r = run_cli(tmp, "rl map --policy " + policy.string() +
                                   " --circuit " + circuit.string() +
                                   " --out " + place.string());
    REQUIRE(r.exit_code == 0);
    json doc = json::parse(slurp(place));
    CHECK(doc.at("placement").size() == 3);
    CHECK(r.stdout_text.find("placement") != std::string::npos);
}
