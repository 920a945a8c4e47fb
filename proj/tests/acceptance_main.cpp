// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Runs the full toolkit end to end at the tolerances pinned below.

#include "qspec/capacity.hpp"
#include "qspec/channels.hpp"
#include "qspec/compression.hpp"
#include "qspec/densecoding.hpp"
#include "qspec/harness.hpp"
#include "qspec/operators.hpp"
#include "qspec/presets.hpp"
#include "qspec/rng.hpp"
#include "qspec/spectrum.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#ifndef QSPEC_SOURCE_DIR
#define QSPEC_SOURCE_DIR "."
#endif

using namespace qspec;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what, double elapsed_s) {
    std::printf("[%s] criterion %d: %s (%.1fs)\n", pass ? "PASS" : "FAIL", criterion,
                what.c_str(), elapsed_s);
    if (!pass) ++g_failures;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

// --------------------------------------------------------------------------
// 1. Operator inequalities: 1000 random instances each, dims 2..8, 1e-9.

void criterion1() {
    Timer timer;
    const int instances = 1000;
    int bad = 0;
    for (int i = 0; i < instances; ++i) {
        auto rng = make_rng(derive_seed(1001, i));
        std::uniform_int_distribution<int> dim_dist(2, 8);
        const int d = dim_dist(rng);

        // Projection maximality for 0 <= P <= I.
        const Matrix a = random_hermitian(d, rng);
        const Matrix b = random_hermitian(d, rng);
        const Matrix p = random_effect(d, rng);
        const Matrix diff = a - b;
        const double rhs =
            (relative_projection(a, b, Relation::Geq).matrix() * diff).trace().real();
        if (!((p * diff).trace().real() <= rhs + 1e-9)) ++bad;

        // Independent oracle for the maximizer value.
        EigSystem es = eig(diff);
        double pos = 0.0;
        for (int k = 0; k < d; ++k) {
            if (es.eigenvalues[k] >= 0.0) pos += es.eigenvalues[k];
        }
        if (std::abs(rhs - pos) > 1e-9) ++bad;

        // CPTP contraction of the thresholded trace.
        const KrausChannel t = random_cptp(d, d, 2, derive_seed(1002, i));
        const Matrix ta = t.apply_matrix(a), tb = t.apply_matrix(b);
        const double lhs2 =
            (relative_projection(ta, tb, Relation::Geq).matrix() * (ta - tb)).trace().real();
        if (!(lhs2 <= rhs + 1e-9)) ++bad;

        // Thresholded reference weight is exponentially small.
        const DensityMatrix rho = random_density(d, rng);
        const Matrix omega = random_psd(d, rng);
        std::uniform_real_distribution<double> gamma_dist(-1.0, 1.0);
        const double gamma = gamma_dist(rng);
        const int n = 1 + i % 3;
        const Projector above = relative_projection(
            rho.matrix(), Matrix(std::exp(n * gamma) * omega), Relation::Geq);
        if (!((above.matrix() * omega).trace().real() <=
              std::exp(-double(n) * gamma) + 1e-9)) {
            ++bad;
        }
    }
    const double elapsed = timer.seconds();
    report(1, bad == 0 && elapsed < 60.0,
           "operator inequalities on 1000 random instances each, max dim 8, tol 1e-9"
           " [violations=" + std::to_string(bad) + "]",
           elapsed);
}

// --------------------------------------------------------------------------
// 2. Fast-path equivalence on 200 random product instances, n <= 6, 1e-9.

void criterion2() {
    Timer timer;
    const int instances = 200;
    int bad = 0;
    double worst = 0.0;
    for (int i = 0; i < instances; ++i) {
        auto rng = make_rng(derive_seed(2001, i));
        std::uniform_int_distribution<int> d_dist(2, 3);
        std::uniform_real_distribution<double> unif(0.05, 1.0);
        std::uniform_real_distribution<double> gamma_dist(-1.5, 0.5);
        const int d = d_dist(rng);
        const int n = 1 + static_cast<int>(rng() % (d == 2 ? 6 : 4));
        const Matrix basis = random_unitary(d, rng);

        std::vector<std::pair<double, double>> eigs;
        Matrix rho_f = Matrix::Zero(d, d), ref_f = Matrix::Zero(d, d);
        double norm = 0.0;
        std::vector<double> rp(d);
        for (int k = 0; k < d; ++k) {
            rp[k] = unif(rng);
            norm += rp[k];
        }
        for (int k = 0; k < d; ++k) {
            const double w = unif(rng);
            eigs.emplace_back(rp[k] / norm, w);
            rho_f += (rp[k] / norm) * basis.col(k) * basis.col(k).adjoint();
            ref_f += w * basis.col(k) * basis.col(k).adjoint();
        }
        rho_f = 0.5 * (rho_f + rho_f.adjoint());
        ref_f = 0.5 * (ref_f + ref_f.adjoint());
        const double gamma = gamma_dist(rng);
        const double fast = product_trace_fastpath(eigs, n, gamma);
        const double dense = difference_trace(kron_power(rho_f, n), kron_power(ref_f, n), n, gamma);
        worst = std::max(worst, std::abs(fast - dense));
        if (std::abs(fast - dense) > 1e-9) ++bad;
    }
    char detail[96];
    std::snprintf(detail, sizeof detail, "fast path vs dense on 200 products, worst |diff|=%.2e",
                  worst);
    report(2, bad == 0, detail, timer.seconds());
}

// --------------------------------------------------------------------------
// 3. Entropy convergence for iid diag(.25,.75).

void criterion3() {
    Timer timer;
    const double h = binary_entropy(0.25);
    Source src = Source::iid_entropy(presets::diag_state({0.25, 0.75}));
    EstimatorOptions opt;
    opt.window = {0.05, 1.2};
    opt.grid = 64;
    opt.epsilon = 0.4;

    bool pass = true;
    double prev_gap = std::numeric_limits<double>::infinity();
    double sup12 = 0.0, inf12 = 0.0;
    const double gap_slack = 2.0 * (opt.window.hi - opt.window.lo) / (opt.grid - 1) / 1024.0;
    for (int n : {4, 8, 12}) {
        EntropyEstimates est = spectral_entropy_estimates(src, n, opt);
        const double gap = std::abs(est.sup_entropy - est.inf_entropy);
        if (gap > prev_gap + gap_slack) pass = false;
        prev_gap = gap;
        if (n == 12) {
            sup12 = est.sup_entropy;
            inf12 = est.inf_entropy;
        }
    }
    if (std::abs(sup12 - h) > 0.05 || std::abs(inf12 - h) > 0.05) pass = false;
    const double elapsed = timer.seconds();
    char detail[128];
    std::snprintf(detail, sizeof detail,
                  "entropy estimates at n=12: sup=%.4f inf=%.4f target h(.25)=%.4f tol 0.05",
                  sup12, inf12, h);
    report(3, pass && elapsed < 60.0, detail, elapsed);
}

// --------------------------------------------------------------------------
// 4. Compression pincer and strong converse.

void criterion4() {
    Timer timer;
    const double h = binary_entropy(0.25);
    Source src = Source::iid_entropy(presets::diag_state({0.25, 0.75}));
    auto spec10 = src.block_spectrum(10);
    bool pass = spec10.has_value();

    double f_scheme = 0.0, f_best = 0.0, bound = 0.0;
    if (pass) {
        f_scheme = threshold_scheme_fidelity(*spec10, 10, h + 0.1);
        f_best = best_case_fidelity(*spec10, 10, h - 0.15);
        bound = converse_fidelity_bound(*spec10, 10, h - 0.15, h - 0.15 + 0.1);
        pass = f_scheme >= 0.9 && f_best <= bound + 1e-9 && bound < 0.7;
    }

    auto rows = strong_converse_probe(src, h - 0.2, {4, 8, 12});
    const bool decay = rows[0].fidelity > rows[1].fidelity &&
                       rows[1].fidelity > rows[2].fidelity && rows[2].fidelity < 0.2;
    pass = pass && decay;

    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "n=10: F(R=h+.1)=%.3f>=0.9, F_best(R=h-.15)=%.3f<=bound=%.3f<0.7; "
                  "strong F=%.3f>%.3f>%.3f<0.2",
                  f_scheme, f_best, bound, rows[0].fidelity, rows[1].fidelity,
                  rows[2].fidelity);
    report(4, pass, detail, timer.seconds());
}

// --------------------------------------------------------------------------
// 5. Mixed source rates and union-projector invariants.

void criterion5() {
    Timer timer;
    EstimatorOptions opt;
    opt.window = {0.02, 1.2};
    opt.grid = 64;
    opt.epsilon = 0.4;
    MixedRateEstimate mre = mixed_rate_estimate(presets::diag_state({0.1, 0.9}),
                                                presets::diag_state({0.4, 0.6}), 0.3, 12, opt);
    bool pass = std::abs(mre.optimal_rate - binary_entropy(0.4)) <= 0.05 &&
                std::abs(mre.strong_converse_rate - binary_entropy(0.1)) <= 0.05;

    int bad = 0;
    for (int i = 0; i < 100; ++i) {
        auto rng = make_rng(derive_seed(5001, i));
        std::uniform_int_distribution<int> dim_dist(3, 5);
        std::uniform_real_distribution<double> alpha_dist(0.4, 1.6);
        std::uniform_real_distribution<double> t_dist(0.1, 0.9);
        const int d = dim_dist(rng);
        const Matrix sigma = random_density(d, rng).matrix();
        const Matrix omega = random_density(d, rng).matrix();
        const double alpha = alpha_dist(rng);
        const double gamma = alpha + 0.25;
        const double t = t_dist(rng);

        MixedSourceProjector mp = mixed_projector(sigma, omega, 1, alpha);
        if (mp.pk.rank() > mp.p0.rank() + mp.q.rank()) ++bad;
        if ((mp.pk.matrix() * mp.p0.matrix() - mp.p0.matrix()).cwiseAbs().maxCoeff() > 1e-9) {
            ++bad;
        }
        if ((mp.pk.matrix() * omega).trace().real() <
            (mp.q.matrix() * omega).trace().real() - 1e-9) {
            ++bad;
        }
        const Matrix rho = t * sigma + (1.0 - t) * omega;
        const double lhs =
            (mp.pk.matrix() * (rho - std::exp(-gamma) * Matrix::Identity(d, d))).trace().real();
        const double rhs = t * (mp.p0.matrix() * sigma).trace().real() +
                           (1.0 - t) * (mp.q.matrix() * omega).trace().real() -
                           2.0 * std::exp(-(gamma - alpha));
        if (lhs < rhs - 1e-9) ++bad;
    }
    pass = pass && bad == 0;

    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "R=%.4f~h(.4)=%.4f, R*=%.4f~h(.1)=%.4f (tol .05); projector invariants "
                  "violations=%d/100",
                  mre.optimal_rate, binary_entropy(0.4), mre.strong_converse_rate,
                  binary_entropy(0.1), bad);
    report(5, pass, detail, timer.seconds());
}

// --------------------------------------------------------------------------
// 6. Classical coding: PGM vs coding bound, BSC capacity, converse.

void criterion6() {
    Timer timer;

    // (a) PGM error never exceeds the coding bound: 200 instances across a
    // generic regime and a sharply-thresholded orthogonal regime where the
    // bound actually bites (bound < 1).
    int bad_a = 0;
    int nontrivial = 0;
    for (int i = 0; i < 200; ++i) {
        auto rng = make_rng(derive_seed(6001, i));
        CQEnsemble ens({1.0}, {Matrix::Identity(2, 2) / 2.0});
        int m = 1;
        double gamma = 0.0;
        if (i % 2 == 0) {
            std::uniform_int_distribution<int> dim_dist(2, 4);
            std::uniform_int_distribution<int> size_dist(2, 4);
            std::uniform_int_distribution<int> m_dist(1, 4);
            std::uniform_real_distribution<double> gamma_dist(0.05, 1.2);
            const int d = dim_dist(rng);
            const int labels = size_dist(rng);
            std::vector<Matrix> states;
            for (int s = 0; s < labels; ++s) states.push_back(random_density(d, rng).matrix());
            ens = CQEnsemble(std::vector<double>(labels, 1.0 / labels), states);
            m = m_dist(rng);
            gamma = gamma_dist(rng);
        } else {
            // 16 orthogonal codeword states with the threshold inside the
            // likelihood-ratio gap: the miss term vanishes and the bound is
            // 8 e^{-gamma} < 1, safe even under codeword collisions.
            const int d = 16;
            std::vector<Matrix> states;
            for (int s = 0; s < d; ++s) {
                Matrix pure = Matrix::Zero(d, d);
                pure(s, s) = 1.0;
                states.push_back(std::move(pure));
            }
            ens = CQEnsemble(std::vector<double>(d, 1.0 / d), states);
            m = 2;
            std::uniform_real_distribution<double> gamma_dist(2.15, 2.7);
            gamma = gamma_dist(rng);
        }
        try {
            const CodeBook cb = pgm_codebook(ens, 1, m, gamma, derive_seed(6002, i));
            const double pe = average_error(cb, ens);
            const double bound = hn_bound(ens, 1, gamma, m);
            if (bound < 1.0) ++nontrivial;
            if (!(pe <= bound + 1e-9)) ++bad_a;
        } catch (const std::runtime_error&) {
            // All projectors vanished: the bound exceeds 2 there, vacuous.
        }
    }

    // Random-coding form of the lemma: the mean error over independent
    // codebook draws stays below the bound (3 sigma of the seed sample).
    {
        const int d = 16, m = 2;
        const double gamma = 2.4;
        std::vector<Matrix> states;
        for (int s = 0; s < d; ++s) {
            Matrix pure = Matrix::Zero(d, d);
            pure(s, s) = 1.0;
            states.push_back(std::move(pure));
        }
        const CQEnsemble ens(std::vector<double>(d, 1.0 / d), states);
        const double bound = hn_bound(ens, 1, gamma, m);
        double sum = 0.0, sum_sq = 0.0;
        const int seeds = 50;
        for (int s = 0; s < seeds; ++s) {
            const double pe =
                average_error(pgm_codebook(ens, 1, m, gamma, derive_seed(6005, s)), ens);
            sum += pe;
            sum_sq += pe * pe;
        }
        const double mean = sum / seeds;
        const double sem = std::sqrt(std::max(0.0, sum_sq / seeds - mean * mean) / seeds);
        if (!(mean <= bound + 3.0 * sem)) ++bad_a;
        if (bound < 1.0) ++nontrivial;
    }

    // (b) BSC(f=0.1) embedded in the dephasing basis.
    EstimatorOptions opt;
    opt.window = {0.02, 0.9};
    opt.grid = 64;
    opt.epsilon = 0.4;
    CapacityEstimate bsc = capacity_estimate({presets::orthogonal_qubit_ensemble()},
                                             presets::flip_channel(0.1), {4, 8, 12}, opt);
    const double target = std::log(2.0) - binary_entropy(0.1);
    const bool pass_b = std::abs(bsc.capacity - target) <= 0.05;

    // (c) Uniform-marginal codes never beat the converse bound: 100 seeds.
    int bad_c = 0;
    for (int i = 0; i < 100; ++i) {
        auto rng = make_rng(derive_seed(6003, i));
        std::uniform_int_distribution<int> dim_dist(2, 3);
        std::uniform_int_distribution<int> m_dist(2, 4);
        std::uniform_real_distribution<double> gamma_dist(-0.3, 0.8);
        const int d = dim_dist(rng);
        const int m = m_dist(rng);
        std::vector<Matrix> pool;
        for (int s = 0; s < 4; ++s) pool.push_back(random_density(d, rng).matrix());
        std::uniform_int_distribution<int> pick(0, 3);
        std::vector<Matrix> cw;
        for (int k = 0; k < m; ++k) cw.push_back(pool[pick(rng)]);
        const CQEnsemble code_ens(std::vector<double>(m, 1.0 / m), cw);
        const double gamma = gamma_dist(rng);
        const double bound =
            converse_error_bound(code_ens.cq_state(), SubsystemShape{{m, d}}, 1, gamma, m);
        double pe = 1.0;
        try {
            const POVM pgm = pgm_decoder(cw, code_ens.average(), 1, 0.05);
            double success = 0.0;
            for (int k = 0; k < m; ++k) success += (cw[k] * pgm.elements()[k]).trace().real();
            pe = 1.0 - success / m;
        } catch (const std::runtime_error&) {
        }
        if (!(pe >= bound - 1e-9)) ++bad_c;
    }

    const bool pass = bad_a == 0 && pass_b && bad_c == 0;
    char detail[192];
    std::snprintf(detail, sizeof detail,
                  "(a) PGM<=bound violations=%d/200 (nontrivial=%d); (b) BSC capacity=%.4f "
                  "target=%.4f tol .05; (c) converse violations=%d/100",
                  bad_a, nontrivial, bsc.capacity, target, bad_c);
    report(6, pass, detail, timer.seconds());
}

// --------------------------------------------------------------------------
// 7. Dense coding.

void criterion7() {
    Timer timer;

    // (a) twirl identity for D in {2,3,4}.
    bool pass_a = true;
    for (int d : {2, 3, 4}) {
        auto rng = make_rng(derive_seed(7001, d));
        const Matrix rho = random_density(2 * d, rng).matrix();
        const Matrix twirled = weyl_twirl(rho, d, 2);
        const Matrix expected =
            tensor(Matrix::Identity(d, d) / d,
                   partial_trace(rho, SubsystemShape{{d, 2}}, {1}));
        if ((twirled - expected).cwiseAbs().maxCoeff() > 1e-9) pass_a = false;
    }

    EstimatorOptions opt;
    opt.window = {-1.0, 1.0};
    opt.grid = 64;
    opt.epsilon = 0.4;

    // (b) Bell-pair capacity estimate at n = 10 with 16 restarts.
    DCCapacity bell = dc_capacity_estimate(presets::bell_pair(), 10, 16, 41, opt);
    const bool pass_b = std::abs(bell.capacity - 2.0 * std::log(2.0)) <= 0.05;

    // (c) four-message Bell protocol decodes exactly.
    DCSimulation sim =
        dc_simulate(presets::bell_pair(), KrausChannel::identity_channel(2), 1, 4, 1.2, 43);
    const bool pass_c = sim.p_e <= 1e-9;

    // (d) spectral estimates agree with the single-letter benchmark at N=1,2.
    bool pass_d = true;
    double worst_d = 0.0;
    const std::vector<BipartiteFactor> states{presets::bell_pair(), presets::product_00(),
                                              presets::bell_mixture(0.8)};
    for (size_t s = 0; s < states.size(); ++s) {
        const DCCapacity spectral =
            dc_capacity_estimate(states[s], 10, 16, derive_seed(7002, s), opt);
        for (int copies : {1, 2}) {
            const HorEvaluation hor =
                hor_capacity(states[s], copies, 16, derive_seed(7003, s, copies));
            const double diff = std::abs(spectral.capacity - hor.capacity);
            worst_d = std::max(worst_d, diff);
            if (diff > 0.05) pass_d = false;
        }
    }

    const bool pass = pass_a && pass_b && pass_c && pass_d;
    char detail[192];
    std::snprintf(detail, sizeof detail,
                  "(a) twirl %s; (b) C_dc(bell)=%.4f~2log2 tol .05; (c) P_e=%.1e; "
                  "(d) worst |spectral-benchmark|=%.4f over 3 states x N=1,2",
                  pass_a ? "exact" : "BROKEN", bell.capacity, sim.p_e, worst_d);
    report(7, pass, detail, timer.seconds());
}

// --------------------------------------------------------------------------
// 8. Determinism: every preset run twice gives identical bytes.

void criterion8() {
    Timer timer;
    namespace fs = std::filesystem;
    const fs::path preset_dir = fs::path(QSPEC_SOURCE_DIR) / "presets";
    bool pass = fs::exists(preset_dir);
    int count = 0;
    std::string offender;
    if (pass) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(preset_dir)) {
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            qspec::harness::CliOverrides serial;
            serial.workers = 1;
            qspec::harness::CliOverrides parallel;
            parallel.workers = 3;
            const std::string a = qspec::harness::csv_string(
                qspec::harness::run_config_file(file.string(), "", serial).rows);
            const std::string b = qspec::harness::csv_string(
                qspec::harness::run_config_file(file.string(), "", parallel).rows);
            ++count;
            if (a != b || a.empty()) {
                pass = false;
                offender = file.filename().string();
                break;
            }
        }
        pass = pass && count > 0;
    }
    char detail[128];
    std::snprintf(detail, sizeof detail, "%d presets run twice, byte-identical CSV%s%s", count,
                  offender.empty() ? "" : "; first mismatch: ", offender.c_str());
    report(8, pass, detail, timer.seconds());
}

} // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    if (g_failures == 0) {
        std::printf("acceptance: all 8 criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    return 1;
}
