#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("MVSDE_CLI");
    REQUIRE(p != nullptr);
    return p;
}

std::string configs_dir() {
    const char* p = std::getenv("MVSDE_CONFIGS");
    REQUIRE(p != nullptr);
    return p;
}

int run(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "mvsde_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

nlohmann::json demo_config() {
    return nlohmann::json::parse(slurp(fs::path(configs_dir()) / "simulate-demo.json"));
}

fs::path write_config(const fs::path& dir, const nlohmann::json& j) {
    const fs::path p = dir / "config.json";
    std::ofstream out(p);
    out << j.dump(2);
    return p;
}

}  // namespace

TEST_CASE("malformed JSON exits with the config code and writes nothing") {
    const fs::path dir = fresh_dir("malformed");
    const fs::path cfg = dir / "bad.json";
    std::ofstream(cfg) << "{ not json";
    const fs::path out = dir / "out";
    CHECK(run("simulate --config " + cfg.string() + " --out " + out.string()) == 2);
    CHECK_FALSE(fs::exists(out / "snapshots.csv"));
    CHECK_FALSE(fs::exists(out / "manifest.json"));
}

TEST_CASE("missing config flag exits with the config code") {
    CHECK(run("simulate") == 2);
}

TEST_CASE("unknown subcommand exits with the config code") {
    CHECK(run("frobnicate") == 2);
}

TEST_CASE("horizon zero produces a single snapshot with N rows") {
    const fs::path dir = fresh_dir("t0");
    nlohmann::json j = demo_config();
    j["solver"]["T"] = 0.0;
    j["solver"]["N"] = 17;
    const fs::path cfg = write_config(dir, j);
    const fs::path out = dir / "out";
    CHECK(run("simulate --config " + cfg.string() + " --out " + out.string()) == 0);
    const std::string snap = slurp(out / "snapshots.csv");
    CHECK(std::count(snap.begin(), snap.end(), '\n') == 1 + 17);
}

TEST_CASE("reruns reproduce identical output checksums") {
    const fs::path dir = fresh_dir("rerun");
    const fs::path cfg = write_config(dir, demo_config());
    const fs::path out_a = dir / "a";
    const fs::path out_b = dir / "b";
    CHECK(run("simulate --config " + cfg.string() + " --out " + out_a.string()) == 0);
    CHECK(run("simulate --config " + cfg.string() + " --out " + out_b.string()) == 0);
    const auto ma = nlohmann::json::parse(slurp(out_a / "manifest.json"));
    const auto mb = nlohmann::json::parse(slurp(out_b / "manifest.json"));
    CHECK(ma["outputs"] == mb["outputs"]);
    CHECK(ma["config_hash"] == mb["config_hash"]);
    CHECK(slurp(out_a / "snapshots.csv") == slurp(out_b / "snapshots.csv"));
}

TEST_CASE("seed override changes the outputs") {
    const fs::path dir = fresh_dir("seed");
    const fs::path cfg = write_config(dir, demo_config());
    const fs::path out_a = dir / "a";
    const fs::path out_b = dir / "b";
    CHECK(run("simulate --config " + cfg.string() + " --out " + out_a.string()) == 0);
    CHECK(run("simulate --config " + cfg.string() + " --out " + out_b.string() + " --seed 999") ==
          0);
    CHECK(slurp(out_a / "snapshots.csv") != slurp(out_b / "snapshots.csv"));
}

TEST_CASE("non-dissipative contraction config is refused with the certification code") {
    const fs::path dir = fresh_dir("refusal");
    nlohmann::json j = demo_config();
    j["coefficients"]["drift"]["theta"] = 0.1;
    j["coefficients"]["drift"]["a_mf"] = 1.0;
    j["coefficients"]["constants"] =
        {{"L_bsigma", 3.0}, {"L1", 2.5}, {"L2", 0.0}, {"L3", 1.0}, {"L4", 1.2}};
    j["experiment"] = {{"mu0", {{"kind", "point"}, {"x", {0.0}}}},
                       {"nu0", {{"kind", "point"}, {"x", {2.0}}}},
                       {"fit_window", {0.1, 0.4}}};
    const fs::path cfg = write_config(dir, j);
    const fs::path out = dir / "out";
    CHECK(run("contraction --config " + cfg.string() + " --out " + out.string()) == 3);
    CHECK_FALSE(fs::exists(out / "contraction.csv"));
}

TEST_CASE("assertion failures exit with code one but still write the report") {
    const fs::path dir = fresh_dir("assertfail");
    nlohmann::json j = demo_config();
    j["solver"]["N"] = 200;
    j["solver"]["T"] = 1.0;
    j["solver"]["record_stride"] = 50;
    // An unattainable fitted-slope requirement forces an assertion failure.
    j["experiment"] = {{"mu0", {{"kind", "point"}, {"x", {0.0}}}},
                       {"nu0", {{"kind", "point"}, {"x", {2.0}}}},
                       {"fit_window", {0.1, 0.9}},
                       {"max_fitted_slope", -50.0}};
    const fs::path cfg = write_config(dir, j);
    const fs::path out = dir / "out";
    CHECK(run("contraction --config " + cfg.string() + " --out " + out.string()) == 1);
    CHECK(fs::exists(out / "contraction.csv"));
    CHECK(fs::exists(out / "manifest.json"));
}
