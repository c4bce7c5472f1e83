#include "mvsde/config.hpp"
#include "mvsde/report_io.hpp"

#include <doctest.h>

#include <charconv>
#include <filesystem>
#include <fstream>

using namespace mvsde;

namespace {

Json demo_config() {
    return Json::parse(R"({
      "operator": {
        "kind": "normal_cone",
        "dimension": 1,
        "set": { "kind": "box", "lower": [0.0], "upper": ["inf"] }
      },
      "coefficients": {
        "drift": { "kind": "mean_field_linear", "theta": 1.0, "a_mf": 0.25 },
        "diffusion": { "kind": "constant", "values": [[0.5]] },
        "constants": { "L_bsigma": 1.0, "L1": 0.25, "L2": 0.0, "L3": 0.25, "L4": 1.75 },
        "perturbation": { "c_b": 0.0, "c_sigma": 0.0 }
      },
      "solver": { "scheme": "resolvent-implicit", "h": 0.001, "N": 100, "T": 0.5,
                  "record_stride": 100 },
      "initial": { "kind": "point", "x": [1.0] },
      "seed": 7,
      "output_dir": "out/demo",
      "experiment": {}
    })");
}

std::string error_message(const Json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("config parses into a validated experiment") {
    const ExperimentConfig cfg = parse_config(demo_config());
    CHECK(cfg.op.dimension() == 1);
    CHECK(cfg.solver.particles == 100);
    CHECK(cfg.solver.seed == 7);
    CHECK(cfg.constants.lambda() == doctest::Approx(1.5));
    CHECK(cfg.constants.dissipative);
    CHECK(cfg.output_dir == "out/demo");
    CHECK(std::holds_alternative<PointMassInit>(cfg.initial));
}

TEST_CASE("validation failures name the offending JSON path") {
    Json j = demo_config();
    j.erase("operator");
    CHECK(error_message(j).find("/operator") != std::string::npos);

    j = demo_config();
    j["solver"]["h"] = -0.1;
    CHECK(error_message(j).find("/solver/h") != std::string::npos);

    j = demo_config();
    j["solver"]["scheme"] = "yosida-explicit";
    CHECK(error_message(j).find("/solver/epsilon") != std::string::npos);

    j = demo_config();
    j["operator"]["set"]["kind"] = "pyramid";
    CHECK(error_message(j).find("/operator/set/kind") != std::string::npos);

    j = demo_config();
    j["coefficients"]["constants"].erase("L3");
    CHECK(error_message(j).find("/coefficients/constants/L3") != std::string::npos);

    j = demo_config();
    j["initial"]["x"] = Json::array({-1.0});
    CHECK_FALSE(error_message(j).empty());  // initial point outside the domain

    j = demo_config();
    j["operator"]["set"] = Json::parse(R"({"kind":"half_space","normal":[2.0],"offset":1.0})");
    CHECK(error_message(j).find("/operator/set/normal") != std::string::npos);

    // Cross-field stability check: explicit scheme with h > eps/2.
    j = demo_config();
    j["solver"]["scheme"] = "yosida-explicit";
    j["solver"]["epsilon"] = 0.001;
    CHECK_FALSE(error_message(j).empty());
}

TEST_CASE("doubles round-trip through the CSV formatter") {
    for (const double v : {0.0, 1.0, -1.5, 0.1, 3.141592653589793, 1e-300, -2.5e17,
                           0.007520295996457929}) {
        const std::string s = format_double(v);
        double back = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), back);
        REQUIRE(res.ec == std::errc());
        CHECK(back == v);
    }
    CHECK(format_time(0.1) == "0.100000000");
    CHECK(format_time(12.25) == "12.250000000");
}

TEST_CASE("checksums are stable") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") != fnv1a64("b"));
    CHECK(fnv1a64_hex("abc") == fnv1a64_hex("abc"));
}

TEST_CASE("atomic writes leave no temp file") {
    const auto dir = std::filesystem::temp_directory_path() / "mvsde_io_test";
    std::filesystem::remove_all(dir);
    const auto path = dir / "data.csv";
    write_file_atomic(path, "x\n1\n");
    CHECK(std::filesystem::exists(path));
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(content == "x\n1\n");
    int entries = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++entries;
    CHECK(entries == 1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("manifest hash round-trips from the stored config") {
    ManifestBuilder builder;
    builder.add_output("a.csv", "1,2\n");
    const Json config = demo_config();
    const Json manifest = builder.build(config, 7, 0.25);
    CHECK(manifest["config_hash"] == fnv1a64_hex(manifest["config"].dump()));
    CHECK(manifest["outputs"]["a.csv"] == fnv1a64_hex("1,2\n"));
    CHECK(manifest["seed"] == 7);
    CHECK(manifest["tool_version"] == kToolVersion);
}

TEST_CASE("csv shapes") {
    SolverConfig cfg;
    cfg.particles = 3;
    cfg.step = 0.5;
    cfg.horizon = 1.0;
    cfg.seed = 5;
    CoefficientSpec coeffs;
    coeffs.drift = MeanFieldLinearDrift{1.0, 0.0};
    coeffs.diffusion = ConstantDiffusion{Mat::Identity(1, 1)};
    const SdeSystem sys{OperatorSpec::zero(1), 0.0, coeffs, PointMassInit{Vec::Zero(1)}};
    const TrajectoryEnsemble ens = simulate(sys, cfg);

    const std::string snap = snapshot_csv(ens);
    CHECK(snap.rfind("t,particle,x1\n", 0) == 0);
    CHECK(std::count(snap.begin(), snap.end(), '\n') == 1 + 3 * 3);  // header + 3 times x 3 rows

    const std::string refl = reflection_variation_csv(ens);
    CHECK(refl.rfind("particle,K_variation\n", 0) == 0);

    // Raw cloud dumps carry no header.
    const std::string cloud = cloud_csv(ens.terminal());
    CHECK(cloud.find("x1") == std::string::npos);
    CHECK(std::count(cloud.begin(), cloud.end(), '\n') == 3);

    InvariantEstimate est;
    est.cloud = ens.terminal();
    est.burn_in = 0.5;
    est.second_moment = est.cloud.second_moment();
    est.seed = 5;
    const Json sidecar = Json::parse(invariant_sidecar_json(est, cfg.particles));
    CHECK(sidecar.size() == 4);
    CHECK(sidecar.contains("second_moment"));
    CHECK(sidecar.contains("burn_in"));
    CHECK(sidecar.contains("N"));
    CHECK(sidecar.contains("seed"));
}
