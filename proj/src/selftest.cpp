#include "mvsde/selftest.hpp"

#include "mvsde/convergence.hpp"
#include "mvsde/ergodicity.hpp"
#include "mvsde/rng.hpp"
#include "mvsde/solver.hpp"
#include "mvsde/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace mvsde {

namespace {

constexpr std::uint64_t kSuiteSeed = 0x73656c6674657374ULL;

class Check {
public:
    explicit Check(std::string name) : result_{std::move(name), true, ""} {}

    // Records the first failure; later samples keep running for the count.
    template <typename... Parts>
    void require(bool ok, const Parts&... parts) {
        if (ok || !result_.pass) return;
        result_.pass = false;
        std::ostringstream oss;
        (oss << ... << parts);
        result_.detail = oss.str();
    }

    PropertyResult done() && { return std::move(result_); }

private:
    PropertyResult result_;
};

std::uint64_t name_hash(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char ch : s) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

Vec sample_point(rng::SequenceSampler& sampler, int d, double radius) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = sampler.uniform(-radius, radius);
    return x;
}

double widening_radius(int k) {
    static constexpr double radii[] = {0.5, 2.0, 10.0};
    return radii[k % 3];
}

}  // namespace

std::vector<NamedOperator> builtin_operator_catalog() {
    std::vector<NamedOperator> catalog;
    catalog.push_back({"zero-2d", OperatorSpec::zero(2)});
    catalog.push_back({"linear-identity-1d", OperatorSpec::linear(Mat::Identity(1, 1))});
    {
        Mat m(2, 2);
        m << 2.0, 0.5, 0.5, 1.0;
        catalog.push_back({"linear-spd-2d", OperatorSpec::linear(m)});
    }
    {
        Mat m(2, 2);
        m << 1.0, 1.0, -1.0, 1.0;
        catalog.push_back({"linear-rotation-2d", OperatorSpec::linear(m)});
    }
    {
        Vec lo(1), hi(1);
        lo << 0.0;
        hi << std::numeric_limits<double>::infinity();
        catalog.push_back({"cone-halfline-1d", OperatorSpec::normal_cone(BoxSet{lo, hi})});
    }
    {
        Vec lo = Vec::Constant(2, -1.0), hi = Vec::Constant(2, 1.0);
        catalog.push_back({"cone-box-2d", OperatorSpec::normal_cone(BoxSet{lo, hi})});
    }
    {
        Vec c(2);
        c << 0.2, 0.0;
        catalog.push_back({"cone-ball-2d", OperatorSpec::normal_cone(BallSet{c, 1.0})});
    }
    {
        Vec n(2);
        n << 1.0, 0.0;
        catalog.push_back({"cone-halfspace-2d", OperatorSpec::normal_cone(HalfSpaceSet{n, 0.5})});
    }
    catalog.push_back({"abs-2d", OperatorSpec::scaled_abs(1.0, 2)});
    {
        Vec lo = Vec::Constant(1, -1.0), hi = Vec::Constant(1, 1.0);
        catalog.push_back(
            {"cone-plus-linear-1d", OperatorSpec::normal_cone_plus_linear(BoxSet{lo, hi}, 0.5)});
    }
    return catalog;
}

std::vector<PropertyResult> operator_property_suite(int samples_per_operator) {
    std::vector<PropertyResult> results;
    static constexpr double eps_grid[] = {1e-3, 1e-1, 1.0};

    for (const NamedOperator& entry : builtin_operator_catalog()) {
        const OperatorSpec& op = entry.spec;
        const int d = op.dimension();
        rng::SequenceSampler sampler(kSuiteSeed ^ name_hash(entry.name), rng::Stream::Property);

        Check contraction("resolvent contraction [" + entry.name + "]");
        Check lipschitz("yosida lipschitz [" + entry.name + "]");
        Check monotone("yosida monotone [" + entry.name + "]");
        Check selection("selection property [" + entry.name + "]");
        Check domination("minimal-section domination [" + entry.name + "]");

        Vec jx, jy, ax, ay;
        for (int k = 0; k < samples_per_operator; ++k) {
            const double radius = widening_radius(k);
            const Vec x = sample_point(sampler, d, radius);
            const Vec y = sample_point(sampler, d, radius);
            const double gap = (x - y).norm();
            for (const double eps : eps_grid) {
                resolvent_into(op, eps, x, jx);
                resolvent_into(op, eps, y, jy);
                ax = (x - jx) / eps;
                ay = (y - jy) / eps;

                contraction.require((jx - jy).norm() <= gap + 1e-12,
                                    "|J(x)-J(y)| = ", (jx - jy).norm(), " > |x-y| = ", gap,
                                    " at eps=", eps);
                // The 1e-12 slack is taken relative to the compared magnitudes;
                // Yosida values reach ~1e4 at eps=1e-3 where equality cases
                // round at the 1e-12 absolute level.
                const double yosida_scale = std::max(1.0, ax.norm() + ay.norm());
                lipschitz.require((ax - ay).norm() <= gap / eps + 1e-12 * yosida_scale,
                                  "Yosida Lipschitz bound violated at eps=", eps);
                monotone.require((x - y).dot(ax - ay) >= -1e-12 * std::max(1.0, gap * yosida_scale),
                                 "Yosida monotonicity violated at eps=", eps);
                selection.require(op.in_domain(jx), "resolvent left the domain at eps=", eps);

                const ConvexSet* domain = op.domain_set();
                if (domain != nullptr && std::holds_alternative<NormalConeMap>(op.node()) &&
                    !set_contains(*domain, x) && ax.norm() > 0.0) {
                    const double mis = normal_cone_misalignment(*domain, jx, ax);
                    selection.require(mis <= 1e-10, "Yosida direction misaligned with the normal ",
                                      "cone: ", mis);
                }
            }

            // Domination is sampled inside the domain.
            const Vec xin = project_domain_closure(op, x);
            const auto min_sec = minimal_section(op, xin);
            if (min_sec.has_value()) {
                for (const double eps : eps_grid) {
                    yosida_into(op, eps, xin, ax);
                    domination.require(ax.norm() <= min_sec->norm() + 1e-12,
                                       "|A_eps| = ", ax.norm(), " > |A_o| = ", min_sec->norm(),
                                       " at eps=", eps);
                }
            }
        }
        results.push_back(std::move(contraction).done());
        results.push_back(std::move(lipschitz).done());
        results.push_back(std::move(monotone).done());
        results.push_back(std::move(selection).done());
        results.push_back(std::move(domination).done());

        // Limits along eps = 10^-k on a fixed test set.
        Check res_limit("resolvent limit to projection [" + entry.name + "]");
        Check yos_limit("yosida limit on the domain [" + entry.name + "]");
        std::vector<Vec> probes;
        for (int k = 0; k < 12; ++k) probes.push_back(sample_point(sampler, d, widening_radius(k)));
        for (const Vec& x : probes) {
            const Vec proj = project_domain_closure(op, x);
            double prev_gap = std::numeric_limits<double>::infinity();
            double final_gap = 0.0;
            for (int k = 1; k <= 8; ++k) {
                const double eps = std::pow(10.0, -k);
                resolvent_into(op, eps, x, jx);
                const double gap = (jx - proj).norm();
                res_limit.require(gap <= prev_gap + 1e-12,
                                  "|J_eps - proj| is not nonincreasing along eps");
                prev_gap = gap;
                final_gap = gap;
            }
            res_limit.require(final_gap <= 1e-6, "|J_eps - proj| = ", final_gap,
                              " at eps=1e-8 exceeds 1e-6");

            const Vec xin = proj;
            const auto min_sec = minimal_section(op, xin);
            if (min_sec.has_value()) {
                // Convergence only; the 1/eps factor amplifies rounding, so
                // monotonicity is not assertable here.
                yosida_into(op, 1e-8, xin, ax);
                const double last = (ax - *min_sec).norm();
                yos_limit.require(last <= 1e-6, "|A_eps - A_o| = ", last, " at eps=1e-8");
            }
            if (const ConvexSet* domain = op.domain_set();
                domain != nullptr && std::holds_alternative<NormalConeMap>(op.node()) &&
                !set_contains(*domain, x)) {
                const double dist = (x - project_onto(*domain, x)).norm();
                for (int k = 1; k <= 8; ++k) {
                    const double eps = std::pow(10.0, -k);
                    yosida_into(op, eps, x, ax);
                    yos_limit.require(ax.norm() >= dist * (1.0 - 1e-6) / eps,
                                      "|A_eps| below the blow-up envelope outside the domain");
                }
            }
        }
        results.push_back(std::move(res_limit).done());
        results.push_back(std::move(yos_limit).done());

        Check coercive("yosida coercivity constants [" + entry.name + "]");
        const CoercivityCertificate cert = yosida_coercivity_constants(op);
        coercive.require(cert.certified, "grid certification failed at eps=", cert.violating_eps,
                         " with margin ", cert.worst_margin);
        results.push_back(std::move(coercive).done());
    }
    return results;
}

std::vector<PropertyResult> measure_property_suite(int instances) {
    rng::SequenceSampler sampler(kSuiteSeed ^ 0x6d656173ULL, rng::Stream::Property);
    std::vector<PropertyResult> results;

    Check axioms("transport metric axioms");
    Check oracle1d("assignment equals sorted coupling in d=1");
    Check brute("assignment equals factorial brute force (N<=8)");
    Check jensen("W1 <= W2 on sampled pairs");
    Check moments("moment norm monotone in theta");

    for (int inst = 0; inst < instances; ++inst) {
        const int d = (inst % 2 == 0) ? 1 : 2;
        const int n = 2 + static_cast<int>(sampler.uniform01() * 7.0);  // 2..8

        std::vector<Vec> pa, pb, pc;
        for (int i = 0; i < n; ++i) {
            pa.push_back(sample_point(sampler, d, 3.0));
            pb.push_back(sample_point(sampler, d, 3.0));
            pc.push_back(sample_point(sampler, d, 3.0));
        }
        const ParticleCloud a = ParticleCloud::from_points(pa);
        const ParticleCloud b = ParticleCloud::from_points(pb);
        const ParticleCloud c = ParticleCloud::from_points(pc);

        const double dab = w2_exact_assignment(a, b).value;
        const double dba = w2_exact_assignment(b, a).value;
        const double dac = w2_exact_assignment(a, c).value;
        const double dcb = w2_exact_assignment(c, b).value;
        axioms.require(std::abs(dab - dba) <= 1e-12, "asymmetry: ", dab, " vs ", dba);
        axioms.require(dab <= dac + dcb + 1e-10, "triangle inequality violated");
        axioms.require(w2_exact_assignment(a, a).value <= 1e-12, "identity of indiscernibles");

        // Permuted copy must be at distance exactly zero.
        std::vector<Vec> perm = pa;
        std::rotate(perm.begin(), perm.begin() + 1, perm.end());
        axioms.require(w2_exact_assignment(a, ParticleCloud::from_points(perm)).value <= 1e-12,
                       "permuted copy is not at distance zero");

        if (d == 1) {
            const double sorted = w2_sorted_1d(a, b).value;
            oracle1d.require(std::abs(dab - sorted) <= 1e-10, "assignment ", dab, " vs sorted ",
                             sorted);
        }

        // Factorial brute force over all matchings.
        std::vector<int> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        double best = std::numeric_limits<double>::infinity();
        do {
            double cost = 0.0;
            for (int i = 0; i < n; ++i) {
                cost += (a.point(i) - b.point(idx[static_cast<std::size_t>(i)])).squaredNorm();
            }
            best = std::min(best, cost);
        } while (std::next_permutation(idx.begin(), idx.end()));
        brute.require(std::abs(dab - std::sqrt(best / n)) <= 1e-12, "assignment ", dab,
                      " vs brute force ", std::sqrt(best / n));

        jensen.require(w1_distance(a, b) <= dab + 1e-12, "W1 > W2");
        moments.require(moment_norm(a, 1.0) <= moment_norm(a, 2.0) + 1e-12,
                        "moment norm not monotone in theta");
    }

    // Larger 1-D equivalence instances (N = 64).
    for (int inst = 0; inst < std::max(4, instances / 4); ++inst) {
        std::vector<Vec> pa, pb;
        for (int i = 0; i < 64; ++i) {
            pa.push_back(sample_point(sampler, 1, 5.0));
            pb.push_back(sample_point(sampler, 1, 5.0));
        }
        const ParticleCloud a = ParticleCloud::from_points(pa);
        const ParticleCloud b = ParticleCloud::from_points(pb);
        oracle1d.require(
            std::abs(w2_exact_assignment(a, b).value - w2_sorted_1d(a, b).value) <= 1e-10,
            "N=64 assignment disagrees with the sorted coupling");
    }

    results.push_back(std::move(axioms).done());
    results.push_back(std::move(oracle1d).done());
    results.push_back(std::move(brute).done());
    results.push_back(std::move(jensen).done());
    results.push_back(std::move(moments).done());
    return results;
}

namespace {

CoefficientSpec benchmark_coefficients(double theta, double mean_weight, double sigma,
                                       double c_b = 0.0, double c_sigma = 0.0) {
    CoefficientSpec spec;
    spec.drift = MeanFieldLinearDrift{theta, mean_weight};
    spec.diffusion = ConstantDiffusion{Mat::Constant(1, 1, sigma)};
    spec.perturbation = {c_b, c_sigma};
    return spec;
}

AssumptionConstants symbolic_constants(double theta, double mean_weight, double sigma) {
    AssumptionConstants constants;
    constants.growth = std::max({theta, std::abs(mean_weight), 1.0}) + sigma;
    constants.l1 = std::max(std::abs(mean_weight), 1e-6);
    constants.l2 = 0.0;
    constants.l3 = std::abs(mean_weight);
    constants.l4 = 2.0 * theta - std::abs(mean_weight);
    constants.dissipative = constants.l4 > 0.0;
    return constants;
}

}  // namespace

std::vector<PropertyResult> coefficient_property_suite(int sample_budget) {
    std::vector<PropertyResult> results;

    Check symbolic("symbolic dissipativity constants certify");
    {
        const CoefficientSpec spec = benchmark_coefficients(1.0, 0.25, 0.5);
        const AssumptionConstants constants = symbolic_constants(1.0, 0.25, 0.5);
        const CertificationReport report = certify_hypotheses(spec, constants, sample_budget);
        symbolic.require(report.passed(), "certification failed:\n", report.summary());
        for (const auto& check : report.checks) {
            symbolic.require(check.worst_slack >= -1e-10, check.name, " slack ",
                             check.worst_slack);
        }
    }
    results.push_back(std::move(symbolic).done());

    Check negative("non-dissipative spec yields a violation witness");
    {
        const CoefficientSpec spec = benchmark_coefficients(0.1, 1.0, 0.5);
        AssumptionConstants constants = symbolic_constants(0.1, 1.0, 0.5);
        // Deliberately wrong declaration: positive lambda for a spec whose
        // true lambda is negative.
        constants.l3 = 1.0;
        constants.l4 = 1.2;
        constants.dissipative = true;
        const CertificationReport report = certify_hypotheses(spec, constants, sample_budget);
        bool found = false;
        for (const auto& check : report.checks) {
            if (check.name.find("dissipativity") != std::string::npos) {
                found = check.violated && !check.witness.empty();
            }
        }
        negative.require(found, "sampler failed to find the dissipativity violation");
    }
    results.push_back(std::move(negative).done());

    Check lipschitz("drift Lipschitz behavior");
    Check envelope("1/n perturbation envelope");
    {
        rng::SequenceSampler sampler(kSuiteSeed ^ 0x636f6566ULL, rng::Stream::Property);
        const CoefficientSpec base = benchmark_coefficients(1.0, 0.25, 0.5, 1.0, 0.5);
        ParticleCloud mu(1, 8);
        Vec p(1);
        for (int i = 0; i < 8; ++i) {
            p[0] = sampler.uniform(-2.0, 2.0);
            mu.set_point(i, p);
        }
        for (int k = 0; k < std::max(200, sample_budget / 10); ++k) {
            Vec x1(1), x2(1);
            x1[0] = sampler.uniform(-10.0, 10.0);
            x2[0] = sampler.uniform(-10.0, 10.0);
            const Vec b1 = eval_drift(base, x1, mu);
            const Vec b2 = eval_drift(base, x2, mu);
            // theta-Lipschitz in x plus the sin perturbation slope c_b/n.
            lipschitz.require((b1 - b2).norm() <= (1.0 + 1e-10) * (x1 - x2).norm() +
                                                       0.0,
                              "drift not theta-Lipschitz for the limit spec");

            for (const int n : {1, 2, 4, 8}) {
                const CoefficientSpec indexed = base.at_index(n);
                const Vec bn = eval_drift(indexed, x1, mu);
                envelope.require((bn - b1).norm() <= 1.0 / n + 1e-12,
                                 "|b^n - b| exceeded c_b/n at n=", n);
                const Mat sn = eval_diffusion(indexed, x1, mu);
                const Mat s0 = eval_diffusion(base, x1, mu);
                envelope.require((sn - s0).norm() <= 0.5 / n + 1e-12,
                                 "|sigma^n - sigma| exceeded c_sigma/n at n=", n);
            }
        }
    }
    results.push_back(std::move(lipschitz).done());
    results.push_back(std::move(envelope).done());
    return results;
}

namespace {

SdeSystem reflected_ou_system(double theta, double mean_weight, double sigma, double x0) {
    Vec lo(1), hi(1), point(1);
    lo << 0.0;
    hi << std::numeric_limits<double>::infinity();
    point << x0;
    return SdeSystem{OperatorSpec::normal_cone(BoxSet{lo, hi}), 0.0,
                     benchmark_coefficients(theta, mean_weight, sigma), PointMassInit{point}};
}

bool ensembles_identical(const TrajectoryEnsemble& a, const TrajectoryEnsemble& b) {
    if (a.times != b.times || a.snapshots.size() != b.snapshots.size()) return false;
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
        const auto fa = a.snapshots[k].flat();
        const auto fb = b.snapshots[k].flat();
        if (!std::equal(fa.begin(), fa.end(), fb.begin(), fb.end())) return false;
    }
    return std::equal(a.reflection_variation.begin(), a.reflection_variation.end(),
                      b.reflection_variation.begin(), b.reflection_variation.end());
}

}  // namespace

std::vector<PropertyResult> solver_property_suite(int particles) {
    std::vector<PropertyResult> results;
    const SdeSystem system = reflected_ou_system(1.0, 0.25, 0.5, 1.0);

    SolverConfig cfg;
    cfg.scheme = Scheme::ResolventImplicit;
    cfg.step = 2e-3;
    cfg.particles = particles;
    cfg.horizon = 2.0;
    cfg.seed = 0x5eedULL;
    cfg.record_stride = 100;
    cfg.threads = 1;

    Check determinism("simulation determinism across reruns and thread counts");
    {
        const TrajectoryEnsemble base = simulate(system, cfg);
        const TrajectoryEnsemble repeat = simulate(system, cfg);
        determinism.require(ensembles_identical(base, repeat), "rerun differed bitwise");
        SolverConfig threaded = cfg;
        threaded.threads = 4;
        const TrajectoryEnsemble parallel = simulate(system, threaded);
        determinism.require(ensembles_identical(base, parallel),
                            "thread count changed the results");
    }
    results.push_back(std::move(determinism).done());

    Check domain("domain preservation under the implicit scheme");
    {
        const TrajectoryEnsemble run = simulate(system, cfg);
        for (const auto& cloud : run.snapshots) {
            for (const double v : cloud.flat()) {
                domain.require(v >= -1e-12, "state left the half-line: ", v);
            }
        }
    }
    results.push_back(std::move(domain).done());

    Check coupling("coupled identical systems coincide exactly");
    {
        const CoupledRun run = simulate_coupled(system, system, cfg);
        coupling.require(ensembles_identical(run.first, run.second),
                         "identical coupled systems diverged");
    }
    results.push_back(std::move(coupling).done());

    Check refinement("step refinement shrinks the distributional gap");
    {
        // Independent-run comparison between consecutive step sizes on
        // reflected Brownian motion, where the projection-scheme boundary
        // bias dominates. N is large enough that the finite-N W2 floor sits
        // well below the bias differences.
        const SdeSystem rbm = reflected_ou_system(0.0, 0.0, 1.0, 0.0);
        const int big_n = std::max(60000, particles);
        std::vector<ParticleCloud> terminals;
        std::uint64_t run_seed = 0xa5a5ULL;
        for (const double h : {4e-3, 2e-3, 1e-3, 5e-4}) {
            SolverConfig rcfg = cfg;
            rcfg.particles = big_n;
            rcfg.step = h;
            rcfg.horizon = 0.2;
            rcfg.record_stride = 1 << 20;  // terminal only
            rcfg.seed = rng::mix64(run_seed++);
            terminals.push_back(simulate(rbm, rcfg).terminal());
        }
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k + 1 < terminals.size(); ++k) {
            const double gap = w2_distance(terminals[k], terminals[k + 1]);
            refinement.require(gap <= prev + 1e-15, "W2(h, h/2) did not decrease: ", gap,
                               " after ", prev);
            prev = gap;
        }
    }
    results.push_back(std::move(refinement).done());

    Check kvar("reflection-variation estimator stable under h -> h/2");
    {
        SolverConfig coarse = cfg;
        coarse.horizon = 2.0;
        SolverConfig fine = coarse;
        fine.step = coarse.step / 2.0;
        const TrajectoryEnsemble a = simulate(system, coarse);
        const TrajectoryEnsemble b = simulate(system, fine);
        const auto mean_kvar = [](const TrajectoryEnsemble& e) {
            double s = std::accumulate(e.reflection_variation.begin(),
                                       e.reflection_variation.end(), 0.0);
            return s / static_cast<double>(e.reflection_variation.size());
        };
        const double ka = mean_kvar(a);
        const double kb = mean_kvar(b);
        kvar.require(std::abs(kb - ka) <= 0.2 * std::max(ka, kb) + 1e-9,
                     "mean reflection variation moved more than 20%: ", ka, " vs ", kb);
        // Nonnegative and nondecreasing in T by construction; larger horizon
        // accumulates at least as much variation.
        SolverConfig longer = coarse;
        longer.horizon = 4.0;
        const TrajectoryEnsemble c = simulate(system, longer);
        kvar.require(mean_kvar(c) >= ka - 1e-12, "variation decreased with the horizon");
    }
    results.push_back(std::move(kvar).done());

    Check moment("moment sup stable under epsilon halving (explicit scheme)");
    {
        SolverConfig e1 = cfg;
        e1.scheme = Scheme::YosidaExplicit;
        e1.penalization = 0.05;
        e1.step = 0.0125;
        e1.horizon = 2.0;
        e1.record_stride = 10;
        SolverConfig e2 = e1;
        e2.penalization = 0.025;
        const double m1 = moment_sup(simulate(system, e1), 1);
        const double m2 = moment_sup(simulate(system, e2), 1);
        moment.require(std::abs(m1 - m2) <= 0.10 * std::max(m1, m2),
                       "moment sup moved more than 10% when epsilon halved: ", m1, " vs ", m2);
    }
    results.push_back(std::move(moment).done());
    return results;
}

std::vector<PropertyResult> lab_property_suite(int particles) {
    std::vector<PropertyResult> results;
    const AssumptionConstants constants = symbolic_constants(1.0, 0.25, 0.5);

    SolverConfig cfg;
    cfg.step = 2e-3;
    cfg.particles = particles;
    cfg.horizon = 3.0;
    cfg.seed = 0x1ab5eedULL;
    cfg.record_stride = 50;

    Check zerogap("equal initial clouds stay at zero W2 under shared noise");
    {
        const SdeSystem system = reflected_ou_system(1.0, 0.25, 0.5, 1.0);
        const ParticleCloud start =
            materialize_initial_cloud(UniformBoxInit{Vec::Zero(1), Vec::Constant(1, 2.0)},
                                      cfg.particles, cfg.seed);
        SdeSystem a = system;
        a.initial = CloudInit{start};
        const CoupledRun run = simulate_coupled(a, a, cfg);
        for (std::size_t k = 0; k < run.first.times.size(); ++k) {
            zerogap.require(
                w2_distance(run.first.snapshots[k], run.second.snapshots[k]) == 0.0,
                "shared-noise equal-initial W2 is nonzero");
        }
    }
    results.push_back(std::move(zerogap).done());

    Check median("invariant estimate matches the stationary quantiles");
    {
        // Reflected OU without interaction has the half-normal stationary law
        // with scale sigma/sqrt(2 theta).
        const SdeSystem system = reflected_ou_system(1.0, 0.0, 1.0, 0.5);
        SolverConfig icfg = cfg;
        icfg.horizon = 8.0;
        icfg.record_stride = 200;
        const InvariantEstimate est =
            estimate_invariant_measure(system, icfg, 4.0, constants, false);
        const HalfNormalLaw law{1.0 / std::sqrt(2.0)};
        const double est_median = quantile(est.cloud, 0.5);
        const double oracle_median = reference_quantile(law, 0.5);
        median.require(std::abs(est_median - oracle_median) <=
                           0.1 * oracle_median + 0.5 / std::sqrt(double(cfg.particles)),
                       "median ", est_median, " vs analytic ", oracle_median);
    }
    results.push_back(std::move(median).done());

    Check translation("contraction fit invariant under rigid translation");
    {
        // Translation-covariant dynamics: free operator + mean-field drift.
        SdeSystem base{OperatorSpec::zero(1), 0.0, benchmark_coefficients(1.0, 0.25, 0.5),
                       PointMassInit{Vec::Zero(1)}};
        ContractionSettings settings{0.2, 2.0, 0.5, std::nullopt};
        const ParticleCloud mu0 =
            materialize_initial_cloud(PointMassInit{Vec::Zero(1)}, cfg.particles, cfg.seed);
        const ParticleCloud nu0 =
            materialize_initial_cloud(PointMassInit{Vec::Constant(1, 2.0)}, cfg.particles,
                                      cfg.seed);
        const ParticleCloud mu0_shift =
            materialize_initial_cloud(PointMassInit{Vec::Constant(1, 5.0)}, cfg.particles,
                                      cfg.seed);
        const ParticleCloud nu0_shift =
            materialize_initial_cloud(PointMassInit{Vec::Constant(1, 7.0)}, cfg.particles,
                                      cfg.seed);
        const ContractionReport r1 =
            contraction_experiment(base, mu0, nu0, cfg, constants, settings);
        const ContractionReport r2 =
            contraction_experiment(base, mu0_shift, nu0_shift, cfg, constants, settings);
        translation.require(r1.fit_available && r2.fit_available, "fit unavailable");
        translation.require(std::abs(r1.fitted_rate - r2.fitted_rate) <=
                                1e-9 * std::max(1.0, std::abs(r1.fitted_rate)),
                            "fitted rates differ: ", r1.fitted_rate, " vs ", r2.fitted_rate);
    }
    results.push_back(std::move(translation).done());

    Check trow("ergodicity table t=0 row holds deterministically");
    {
        const SdeSystem system = reflected_ou_system(1.0, 0.25, 0.5, 0.5);
        SolverConfig ecfg = cfg;
        ecfg.horizon = 6.0;
        ecfg.record_stride = 250;
        ErgodicitySettings settings{3.0, 2.0, 0.5};
        const ParticleCloud nu0 =
            materialize_initial_cloud(PointMassInit{Vec::Constant(1, 3.0)}, cfg.particles,
                                      cfg.seed);
        const ErgodicityReport report =
            ergodicity_bound_experiment(system, nu0, ecfg, constants, settings);
        trow.require(!report.rows.empty(), "no rows");
        trow.require(report.rows.front().t == 0.0, "first row is not t=0");
        trow.require(report.rows.front().w2_sq <= report.rows.front().bound,
                     "t=0 row violates the deterministic inequality");
    }
    results.push_back(std::move(trow).done());

    Check nullpert("null perturbation reports exactly zero gaps");
    {
        Vec lo(1), hi(1);
        lo << 0.0;
        hi << std::numeric_limits<double>::infinity();
        OperatorSequenceSpec seq{OperatorSpec::normal_cone(BoxSet{lo, hi}),
                                 OperatorSequenceSpec::Family::Constant, 0.0, 2.0, 0.5};
        SequenceSystem family{seq, benchmark_coefficients(1.0, 0.25, 0.5),
                              PointMassInit{Vec::Constant(1, 1.0)}, {1, 2, 4}};
        SolverConfig scfg = cfg;
        scfg.horizon = 1.0;
        const ConvergenceReport report =
            solution_convergence_experiment(family, scfg, constants, TrendSettings{});
        for (const auto& row : report.rows) {
            nullpert.require(row.sup_mse == 0.0 && row.terminal_w2 == 0.0,
                             "null-perturbation gap nonzero at n=", row.n);
        }
        nullpert.require(report.passed(), report.failure);
    }
    results.push_back(std::move(nullpert).done());

    Check deviation("deviation arithmetic matches the closed forms");
    {
        Vec lo(1), hi(1);
        lo << 0.0;
        hi << std::numeric_limits<double>::infinity();
        OperatorSequenceSpec seq{OperatorSpec::normal_cone(BoxSet{lo, hi}),
                                 OperatorSequenceSpec::Family::LinearShift, 1.0, 8.0, 0.5};
        SequenceSystem family{seq, benchmark_coefficients(1.0, 0.25, 0.5, 1.0, 0.5),
                              PointMassInit{Vec::Constant(1, 1.0)}, {1, 2, 4, 8}};
        std::vector<Vec> grid;
        for (int i = 0; i <= 20; ++i) grid.push_back(Vec::Constant(1, 0.1 * i));
        const double eps = 0.1;
        const DeviationReport report =
            hypothesis_sequence_checks(family, eps, grid, family.indices);
        deviation.require(report.pass, report.failure);
        for (const auto& row : report.rows) {
            // Closed forms for the half-line cone and the sin perturbation.
            const double shift = 1.0 / row.n;
            const double expected_op = 2.0 * shift / (1.0 + eps * shift);
            deviation.require(std::abs(row.operator_dev - expected_op) <= 1e-10,
                              "operator deviation ", row.operator_dev, " vs closed form ",
                              expected_op, " at n=", row.n);
            double expected_drift = 0.0;
            for (const Vec& x : grid) {
                expected_drift = std::max(expected_drift, std::abs(std::sin(x[0])) / row.n);
            }
            deviation.require(std::abs(row.drift_dev - expected_drift) <= 1e-10,
                              "drift deviation vs closed form at n=", row.n);
            deviation.require(std::abs(row.diffusion_dev - 0.5 / row.n) <= 1e-12,
                              "diffusion deviation vs closed form at n=", row.n);
        }
    }
    results.push_back(std::move(deviation).done());
    return results;
}

std::vector<PropertyResult> run_selftest() {
    std::vector<PropertyResult> all;
    const auto append = [&all](std::vector<PropertyResult> batch) {
        for (auto& r : batch) all.push_back(std::move(r));
    };
    append(operator_property_suite(2000));
    append(measure_property_suite(60));
    append(coefficient_property_suite(2000));
    append(solver_property_suite(400));
    append(lab_property_suite(400));
    return all;
}

}  // namespace mvsde
