#include "mvsde/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace mvsde {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

const Json& member(const Json& j, const std::string& path, const std::string& key) {
    if (!j.is_object()) fail(path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) fail(path + "/" + key, "missing required field");
    return *it;
}

const Json* maybe(const Json& j, const std::string& key) {
    if (!j.is_object()) return nullptr;
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double number(const Json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

double number_field(const Json& j, const std::string& path, const std::string& key) {
    return number(member(j, path, key), path + "/" + key);
}

double number_or(const Json& j, const std::string& path, const std::string& key, double fallback) {
    const Json* v = maybe(j, key);
    return v == nullptr ? fallback : number(*v, path + "/" + key);
}

int integer_field(const Json& j, const std::string& path, const std::string& key) {
    const Json& v = member(j, path, key);
    if (!v.is_number_integer()) fail(path + "/" + key, "expected an integer");
    return v.get<int>();
}

std::string string_field(const Json& j, const std::string& path, const std::string& key) {
    const Json& v = member(j, path, key);
    if (!v.is_string()) fail(path + "/" + key, "expected a string");
    return v.get<std::string>();
}

// Box bounds accept numbers, null (unbounded), or the strings "inf"/"-inf".
double extended_number(const Json& j, const std::string& path) {
    if (j.is_null()) fail(path, "use \"inf\" or \"-inf\" for unbounded entries");
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    fail(path, "expected a number or \"inf\"/\"-inf\"");
}

Vec vector_field(const Json& j, const std::string& path, const std::string& key,
                 bool extended = false) {
    const Json& v = member(j, path, key);
    const std::string vpath = path + "/" + key;
    if (!v.is_array() || v.empty()) fail(vpath, "expected a nonempty array of numbers");
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string epath = vpath + "/" + std::to_string(i);
        out[static_cast<Eigen::Index>(i)] =
            extended ? extended_number(v[i], epath) : number(v[i], epath);
    }
    return out;
}

Mat matrix_field(const Json& j, const std::string& path, const std::string& key) {
    const Json& v = member(j, path, key);
    const std::string vpath = path + "/" + key;
    if (!v.is_array() || v.empty() || !v[0].is_array() || v[0].empty()) {
        fail(vpath, "expected a nonempty array of rows");
    }
    const std::size_t rows = v.size();
    const std::size_t cols = v[0].size();
    Mat out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!v[r].is_array() || v[r].size() != cols) {
            fail(vpath + "/" + std::to_string(r), "ragged matrix rows");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                number(v[r][c], vpath + "/" + std::to_string(r) + "/" + std::to_string(c));
        }
    }
    return out;
}

ConvexSet parse_set(const Json& j, const std::string& path) {
    const std::string kind = string_field(j, path, "kind");
    if (kind == "box") {
        const Vec lower = vector_field(j, path, "lower", /*extended=*/true);
        const Vec upper = vector_field(j, path, "upper", /*extended=*/true);
        if (lower.size() != upper.size()) fail(path, "box lower/upper sizes differ");
        for (Eigen::Index i = 0; i < lower.size(); ++i) {
            if (!(lower[i] <= upper[i])) fail(path, "box needs lower <= upper");
        }
        return BoxSet{lower, upper};
    }
    if (kind == "ball") {
        const Vec center = vector_field(j, path, "center");
        const double radius = number_field(j, path, "radius");
        if (!(radius > 0.0)) fail(path + "/radius", "ball radius must be positive");
        return BallSet{center, radius};
    }
    if (kind == "half_space") {
        const Vec normal = vector_field(j, path, "normal");
        if (std::abs(normal.norm() - 1.0) > 1e-9) {
            fail(path + "/normal", "half-space normal must be a unit vector");
        }
        return HalfSpaceSet{normal, number_field(j, path, "offset")};
    }
    fail(path + "/kind", "unknown convex set kind '" + kind + "'");
}

OperatorSpec parse_operator(const Json& j, const std::string& path) {
    const std::string kind = string_field(j, path, "kind");
    const int dim = integer_field(j, path, "dimension");
    if (dim < 1) fail(path + "/dimension", "dimension must be positive");

    if (kind == "zero") return OperatorSpec::zero(dim);
    if (kind == "linear") {
        const Mat m = matrix_field(j, path, "matrix");
        if (m.rows() != dim || m.cols() != dim) {
            fail(path + "/matrix", "matrix shape disagrees with dimension");
        }
        return OperatorSpec::linear(m);
    }
    if (kind == "scaled_abs") {
        const double w = number_field(j, path, "weight");
        if (!(w >= 0.0)) fail(path + "/weight", "weight must be nonnegative");
        return OperatorSpec::scaled_abs(w, dim);
    }
    if (kind == "normal_cone" || kind == "normal_cone_plus_linear") {
        const ConvexSet set = parse_set(member(j, path, "set"), path + "/set");
        if (set_dim(set) != dim) fail(path + "/set", "set dimension disagrees with dimension");
        if (kind == "normal_cone") return OperatorSpec::normal_cone(set);
        const double beta = number_field(j, path, "beta");
        if (!(beta >= 0.0)) fail(path + "/beta", "beta must be nonnegative");
        return OperatorSpec::normal_cone_plus_linear(set, beta);
    }
    fail(path + "/kind", "unknown operator kind '" + kind + "'");
}

DriftSpec parse_drift(const Json& j, const std::string& path) {
    const std::string kind = string_field(j, path, "kind");
    const double theta = number_field(j, path, "theta");
    if (!(theta >= 0.0)) fail(path + "/theta", "theta must be nonnegative");
    const double a_mf = number_or(j, path, "a_mf", 0.0);
    if (kind == "mean_field_linear") return MeanFieldLinearDrift{theta, a_mf};
    if (kind == "kernel_integral") return BoundedKernelDrift{theta, a_mf};
    fail(path + "/kind", "unknown drift kind '" + kind + "'");
}

DiffusionSpec parse_diffusion(const Json& j, const std::string& path) {
    const std::string kind = string_field(j, path, "kind");
    if (kind == "constant") return ConstantDiffusion{matrix_field(j, path, "values")};
    if (kind == "state_linear") {
        return StateLinearDiffusion{number_field(j, path, "s0"), number_field(j, path, "s1")};
    }
    if (kind == "measure_lipschitz") {
        return MeanLinearDiffusion{number_field(j, path, "s0"), number_field(j, path, "s2")};
    }
    fail(path + "/kind", "unknown diffusion kind '" + kind + "'");
}

AssumptionConstants parse_constants(const Json& j, const std::string& path) {
    AssumptionConstants out;
    out.growth = number_field(j, path, "L_bsigma");
    out.l1 = number_field(j, path, "L1");
    out.l2 = number_field(j, path, "L2");
    out.l3 = number_field(j, path, "L3");
    out.l4 = number_field(j, path, "L4");
    if (out.growth < 0 || out.l1 < 0 || out.l2 < 0 || out.l3 < 0 || out.l4 < 0) {
        fail(path, "hypothesis constants must be nonnegative");
    }
    const Json* d = maybe(j, "dissipative");
    if (d != nullptr) {
        if (!d->is_boolean()) fail(path + "/dissipative", "expected a boolean");
        out.dissipative = d->get<bool>();
    } else {
        out.dissipative = out.l4 > 0.0;
    }
    return out;
}

SolverConfig parse_solver(const Json& j, const std::string& path) {
    SolverConfig out;
    const std::string scheme = string_field(j, path, "scheme");
    if (scheme == "resolvent-implicit") {
        out.scheme = Scheme::ResolventImplicit;
    } else if (scheme == "yosida-explicit") {
        out.scheme = Scheme::YosidaExplicit;
    } else {
        fail(path + "/scheme", "unknown scheme '" + scheme + "'");
    }
    out.penalization = number_or(j, path, "epsilon", 0.0);
    if (out.scheme == Scheme::YosidaExplicit && !(out.penalization > 0.0)) {
        fail(path + "/epsilon", "the explicit scheme requires a positive epsilon");
    }
    out.step = number_field(j, path, "h");
    if (!(out.step > 0.0)) fail(path + "/h", "step size must be positive");
    out.particles = integer_field(j, path, "N");
    if (out.particles < 1) fail(path + "/N", "particle count must be positive");
    out.horizon = number_field(j, path, "T");
    if (!(out.horizon >= 0.0)) fail(path + "/T", "horizon must be nonnegative");
    const Json* stride = maybe(j, "record_stride");
    out.record_stride = stride == nullptr ? 1 : integer_field(j, path, "record_stride");
    if (out.record_stride < 1) fail(path + "/record_stride", "record stride must be positive");
    return out;
}

OperatorSequenceSpec parse_sequence(const Json& j, const std::string& path,
                                    const OperatorSpec& base) {
    OperatorSequenceSpec seq{base};
    const std::string rule = string_field(j, path, "rule");
    if (rule == "constant") {
        seq.family = OperatorSequenceSpec::Family::Constant;
    } else if (rule == "linear_shift") {
        seq.family = OperatorSequenceSpec::Family::LinearShift;
        seq.shift_scale = number_field(j, path, "c");
        if (!(seq.shift_scale >= 0.0)) fail(path + "/c", "shift scale must be nonnegative");
    } else {
        fail(path + "/rule", "unknown sequence rule '" + rule + "'");
    }
    seq.local_bound = number_or(j, path, "gamma", 0.0);
    seq.local_radius = number_or(j, path, "kappa", 1.0);
    if (seq.local_bound < 0.0) fail(path + "/gamma", "gamma must be nonnegative");
    if (!(seq.local_radius > 0.0)) fail(path + "/kappa", "kappa must be positive");
    return seq;
}

}  // namespace

InitialLaw parse_initial_law(const Json& j, const std::string& path) {
    const std::string kind = string_field(j, path, "kind");
    if (kind == "point") return PointMassInit{vector_field(j, path, "x")};
    if (kind == "uniform_box") {
        const Vec lower = vector_field(j, path, "lower");
        const Vec upper = vector_field(j, path, "upper");
        if (lower.size() != upper.size()) fail(path, "uniform box lower/upper sizes differ");
        for (Eigen::Index i = 0; i < lower.size(); ++i) {
            if (!(lower[i] <= upper[i])) fail(path, "uniform box needs lower <= upper");
        }
        return UniformBoxInit{lower, upper};
    }
    if (kind == "cloud") {
        const Json& pts = member(j, path, "points");
        const std::string ppath = path + "/points";
        if (!pts.is_array() || pts.empty()) fail(ppath, "expected a nonempty array of points");
        std::vector<Vec> points;
        points.reserve(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const Json& row = pts[i];
            const std::string rpath = ppath + "/" + std::to_string(i);
            if (!row.is_array() || row.empty()) fail(rpath, "expected a point array");
            Vec x(row.size());
            for (std::size_t k = 0; k < row.size(); ++k) {
                x[static_cast<Eigen::Index>(k)] = number(row[k], rpath + "/" + std::to_string(k));
            }
            if (!points.empty() && x.size() != points.front().size()) {
                fail(rpath, "points must share one dimension");
            }
            points.push_back(std::move(x));
        }
        return CloudInit{ParticleCloud::from_points(points)};
    }
    fail(path + "/kind", "unknown initial law kind '" + kind + "'");
}

ExperimentConfig parse_config(const Json& j) {
    if (!j.is_object()) throw ConfigError("/: top-level config must be an object");
    ExperimentConfig cfg;
    cfg.raw = j;

    cfg.op = parse_operator(member(j, "", "operator"), "/operator");

    const Json& coeff = member(j, "", "coefficients");
    cfg.coefficients.drift = parse_drift(member(coeff, "/coefficients", "drift"),
                                         "/coefficients/drift");
    cfg.coefficients.diffusion = parse_diffusion(member(coeff, "/coefficients", "diffusion"),
                                                 "/coefficients/diffusion");
    if (const Json* pert = maybe(coeff, "perturbation")) {
        cfg.coefficients.perturbation.drift_scale =
            number_or(*pert, "/coefficients/perturbation", "c_b", 0.0);
        cfg.coefficients.perturbation.diffusion_scale =
            number_or(*pert, "/coefficients/perturbation", "c_sigma", 0.0);
        if (cfg.coefficients.perturbation.drift_scale < 0.0 ||
            cfg.coefficients.perturbation.diffusion_scale < 0.0) {
            fail("/coefficients/perturbation", "perturbation scales must be nonnegative");
        }
    }
    cfg.constants = parse_constants(member(coeff, "/coefficients", "constants"),
                                    "/coefficients/constants");

    cfg.solver = parse_solver(member(j, "", "solver"), "/solver");
    cfg.initial = parse_initial_law(member(j, "", "initial"), "/initial");

    const Json& seed = member(j, "", "seed");
    if (!seed.is_number_integer() && !seed.is_number_unsigned()) {
        fail("/seed", "expected an integer seed");
    }
    cfg.solver.seed = seed.get<std::uint64_t>();

    if (const Json* out = maybe(j, "output_dir")) {
        if (!out->is_string()) fail("/output_dir", "expected a string");
        cfg.output_dir = out->get<std::string>();
    }
    if (const Json* exp = maybe(j, "experiment")) {
        if (!exp->is_object()) fail("/experiment", "expected an object");
        cfg.experiment = *exp;
    }
    if (const Json* seqj = maybe(j, "operator_sequence")) {
        cfg.sequence = parse_sequence(*seqj, "/operator_sequence", cfg.op);
    }

    // Cross-field checks happen before any run.
    validate(cfg.system(), cfg.solver);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
    }
    return parse_config(j);
}

}  // namespace mvsde
