#include "qspec/harness.hpp"

#include "qspec/capacity.hpp"
#include "qspec/channels.hpp"
#include "qspec/compression.hpp"
#include "qspec/densecoding.hpp"
#include "qspec/operators.hpp"
#include "qspec/presets.hpp"
#include "qspec/rng.hpp"
#include "qspec/spectrum.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

namespace qspec::harness {

using nlohmann::json;

namespace {

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_param(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void validate_keys(const json& obj, const std::set<std::string>& allowed,
                   const std::string& context) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ConfigError("config: unknown key '" + it.key() + "' in " + context);
        }
    }
}

double require_number(const json& obj, const std::string& key, const std::string& context) {
    if (!obj.contains(key) || !obj.at(key).is_number()) {
        throw ConfigError("config: field '" + key + "' in " + context + " must be a number");
    }
    return obj.at(key).get<double>();
}

std::vector<double> require_prob_vector(const json& obj, const std::string& key,
                                        const std::string& context) {
    if (!obj.contains(key) || !obj.at(key).is_array() || obj.at(key).empty()) {
        throw ConfigError("config: field '" + key + "' in " + context +
                          " must be a nonempty array");
    }
    std::vector<double> probs;
    double sum = 0.0;
    for (const auto& v : obj.at(key)) {
        if (!v.is_number()) {
            throw ConfigError("config: field '" + key + "' in " + context +
                              " must contain numbers");
        }
        probs.push_back(v.get<double>());
        if (probs.back() < 0.0) {
            throw ConfigError("config: field '" + key + "' in " + context +
                              " must be nonnegative");
        }
        sum += probs.back();
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("config: field '" + key + "' in " + context + " must sum to 1");
    }
    return probs;
}

struct CommonConfig {
    std::string experiment;
    std::uint64_t seed = 1;
    std::optional<std::string> out;
    double epsilon = 0.01;
    int grid = 64;
    GammaWindow window{-1.0, 1.0};
    std::vector<int> n_list;
    int workers = 1;

    EstimatorOptions estimator() const {
        EstimatorOptions opt;
        opt.window = window;
        opt.grid = grid;
        opt.epsilon = epsilon;
        return opt;
    }
};

CommonConfig parse_common(const json& cfg, bool needs_n, bool needs_window) {
    CommonConfig c;
    if (!cfg.contains("experiment") || !cfg.at("experiment").is_string()) {
        throw ConfigError("config: field 'experiment' must name the experiment kind");
    }
    c.experiment = cfg.at("experiment").get<std::string>();
    if (cfg.contains("seed")) {
        if (!cfg.at("seed").is_number_unsigned()) {
            throw ConfigError("config: field 'seed' must be an unsigned integer");
        }
        c.seed = cfg.at("seed").get<std::uint64_t>();
    }
    if (cfg.contains("out")) {
        if (!cfg.at("out").is_string()) throw ConfigError("config: field 'out' must be a path");
        c.out = cfg.at("out").get<std::string>();
    }
    if (cfg.contains("epsilon")) {
        c.epsilon = require_number(cfg, "epsilon", "config");
        if (!(c.epsilon > 0.0 && c.epsilon < 0.5)) {
            throw ConfigError("config: field 'epsilon' must lie in (0, 0.5)");
        }
    }
    if (cfg.contains("grid")) {
        c.grid = static_cast<int>(require_number(cfg, "grid", "config"));
        if (c.grid < 8) throw ConfigError("config: field 'grid' must be >= 8");
    }
    if (cfg.contains("gamma_window")) {
        const auto& w = cfg.at("gamma_window");
        if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
            throw ConfigError("config: field 'gamma_window' must be [lo, hi]");
        }
        c.window = GammaWindow{w[0].get<double>(), w[1].get<double>()};
        if (!(c.window.hi > c.window.lo)) {
            throw ConfigError("config: field 'gamma_window' must have lo < hi");
        }
    } else if (needs_window) {
        throw ConfigError("config: field 'gamma_window' is required");
    }
    if (cfg.contains("n")) {
        if (!cfg.at("n").is_array() || cfg.at("n").empty()) {
            throw ConfigError("config: field 'n' must be a nonempty array");
        }
        for (const auto& v : cfg.at("n")) {
            if (!v.is_number_integer() || v.get<int>() < 1) {
                throw ConfigError("config: field 'n' must contain positive integers");
            }
            c.n_list.push_back(v.get<int>());
        }
    } else if (needs_n) {
        throw ConfigError("config: field 'n' is required");
    }
    return c;
}

Source parse_source(const json& cfg, std::string* descriptor) {
    if (!cfg.contains("source") || !cfg.at("source").is_object()) {
        throw ConfigError("config: field 'source' must be an object");
    }
    const json& src = cfg.at("source");
    if (!src.contains("kind") || !src.at("kind").is_string()) {
        throw ConfigError("config: source.kind must be a string");
    }
    const std::string kind = src.at("kind").get<std::string>();
    if (kind == "iid_diag") {
        validate_keys(src, {"kind", "probs"}, "source");
        auto probs = require_prob_vector(src, "probs", "source");
        std::string d = "source=iid_diag(";
        for (size_t i = 0; i < probs.size(); ++i) {
            d += (i ? "|" : "") + format_param(probs[i]);
        }
        d += ")";
        if (descriptor) *descriptor = d;
        return Source::iid_entropy(presets::diag_state(probs));
    }
    if (kind == "mixture_diag") {
        validate_keys(src, {"kind", "t", "sigma_probs", "omega_probs"}, "source");
        const double t = require_number(src, "t", "source");
        auto sp = require_prob_vector(src, "sigma_probs", "source");
        auto op = require_prob_vector(src, "omega_probs", "source");
        if (descriptor) *descriptor = "source=mixture_diag(t=" + format_param(t) + ")";
        return Source::mixture(t, presets::diag_state(sp), presets::diag_state(op));
    }
    throw ConfigError("config: unknown source.kind '" + kind + "'");
}

KrausChannel parse_channel(const json& cfg, std::string* descriptor) {
    if (!cfg.contains("channel") || !cfg.at("channel").is_object()) {
        throw ConfigError("config: field 'channel' must be an object");
    }
    const json& ch = cfg.at("channel");
    if (!ch.contains("kind") || !ch.at("kind").is_string()) {
        throw ConfigError("config: channel.kind must be a string");
    }
    const std::string kind = ch.at("kind").get<std::string>();
    if (kind == "identity") {
        validate_keys(ch, {"kind", "dim"}, "channel");
        const int dim = ch.contains("dim")
                            ? static_cast<int>(require_number(ch, "dim", "channel"))
                            : 2;
        if (descriptor) *descriptor = "channel=identity(" + std::to_string(dim) + ")";
        return KrausChannel::identity_channel(dim);
    }
    if (kind == "flip") {
        validate_keys(ch, {"kind", "f"}, "channel");
        const double f = require_number(ch, "f", "channel");
        if (descriptor) *descriptor = "channel=flip(f=" + format_param(f) + ")";
        return presets::flip_channel(f);
    }
    if (kind == "depolarizing") {
        validate_keys(ch, {"kind", "dim"}, "channel");
        const int dim = ch.contains("dim")
                            ? static_cast<int>(require_number(ch, "dim", "channel"))
                            : 2;
        if (descriptor) *descriptor = "channel=depolarizing(" + std::to_string(dim) + ")";
        return presets::depolarizing(dim);
    }
    if (kind == "dephasing") {
        validate_keys(ch, {"kind"}, "channel");
        if (descriptor) *descriptor = "channel=dephasing";
        return presets::dephasing_qubit();
    }
    throw ConfigError("config: unknown channel.kind '" + kind + "'");
}

BipartiteFactor parse_state(const json& cfg, std::string* descriptor) {
    if (!cfg.contains("state") || !cfg.at("state").is_object()) {
        throw ConfigError("config: field 'state' must be an object");
    }
    const json& st = cfg.at("state");
    if (!st.contains("kind") || !st.at("kind").is_string()) {
        throw ConfigError("config: state.kind must be a string");
    }
    const std::string kind = st.at("kind").get<std::string>();
    if (kind == "bell") {
        validate_keys(st, {"kind"}, "state");
        if (descriptor) *descriptor = "state=bell";
        return presets::bell_pair();
    }
    if (kind == "product00") {
        validate_keys(st, {"kind"}, "state");
        if (descriptor) *descriptor = "state=product00";
        return presets::product_00();
    }
    if (kind == "bell_mixture") {
        validate_keys(st, {"kind", "a"}, "state");
        const double a = require_number(st, "a", "state");
        if (descriptor) *descriptor = "state=bell_mixture(a=" + format_param(a) + ")";
        return presets::bell_mixture(a);
    }
    throw ConfigError("config: unknown state.kind '" + kind + "'");
}

using Task = std::function<std::vector<ResultRow>()>;

std::vector<ResultRow> run_tasks(std::vector<Task> tasks, int workers,
                                 const std::string& experiment) {
    std::vector<std::vector<ResultRow>> slots(tasks.size());
    std::atomic<size_t> next{0};
    const int pool = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                slots[i] = tasks[i]();
            } catch (const std::exception& e) {
                std::string msg = e.what();
                std::replace(msg.begin(), msg.end(), ',', ';');
                slots[i] = {ResultRow{experiment, 0, 0, "error=" + msg, "error", 1.0}};
            }
        }
    };
    if (pool == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(pool);
        for (int t = 0; t < pool; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    std::vector<ResultRow> rows;
    for (auto& slot : slots) {
        rows.insert(rows.end(), slot.begin(), slot.end());
    }
    return rows;
}

void sort_rows(std::vector<ResultRow>& rows) {
    std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        if (a.n != b.n) return a.n < b.n;
        if (a.params != b.params) return a.params < b.params;
        if (a.seed != b.seed) return a.seed < b.seed;
        return a.metric < b.metric;
    });
}

// ---------------------------------------------------------------------------
// experiments

RunOutcome run_spectrum(const json& cfg, const CommonConfig& common) {
    validate_keys(cfg,
                  {"experiment", "seed", "out", "epsilon", "grid", "gamma_window", "n",
                   "source"},
                  "config");
    std::string descriptor;
    const Source src = parse_source(cfg, &descriptor);
    descriptor += ";eps=" + format_param(common.epsilon);

    std::vector<Task> tasks;
    for (int n : common.n_list) {
        tasks.push_back([=]() {
            EntropyEstimates est = spectral_entropy_estimates(src, n, common.estimator());
            const double vn = src.vn_rate(n);
            return std::vector<ResultRow>{
                {common.experiment, n, common.seed, descriptor, "S_sup_hat", est.sup_entropy},
                {common.experiment, n, common.seed, descriptor, "S_inf_hat", est.inf_entropy},
                {common.experiment, n, common.seed, descriptor, "vn_rate", vn},
            };
        });
    }
    RunOutcome out;
    out.rows = run_tasks(std::move(tasks), common.workers, common.experiment);
    return out;
}

RunOutcome run_compress(const json& cfg, const CommonConfig& common) {
    validate_keys(cfg,
                  {"experiment", "seed", "out", "n", "source", "rate_achieve",
                   "rate_converse", "gamma_converse", "rate_strong"},
                  "config");
    std::string descriptor;
    const Source src = parse_source(cfg, &descriptor);
    const double rate_achieve = require_number(cfg, "rate_achieve", "config");
    const double rate_converse = require_number(cfg, "rate_converse", "config");
    const double gamma_converse = require_number(cfg, "gamma_converse", "config");
    const double rate_strong = require_number(cfg, "rate_strong", "config");
    descriptor += ";Ra=" + format_param(rate_achieve) + ";Rc=" + format_param(rate_converse) +
                  ";gc=" + format_param(gamma_converse) + ";Rs=" + format_param(rate_strong);

    std::vector<Task> tasks;
    for (int n : common.n_list) {
        tasks.push_back([=]() {
            auto spectrum = src.block_spectrum(n);
            if (!spectrum) throw std::runtime_error("compress: source has no product spectrum");
            return std::vector<ResultRow>{
                {common.experiment, n, common.seed, descriptor, "F_scheme",
                 threshold_scheme_fidelity(*spectrum, n, rate_achieve)},
                {common.experiment, n, common.seed, descriptor, "F_best",
                 best_case_fidelity(*spectrum, n, rate_converse)},
                {common.experiment, n, common.seed, descriptor, "converse_bound",
                 converse_fidelity_bound(*spectrum, n, rate_converse, gamma_converse)},
                {common.experiment, n, common.seed, descriptor, "F_strong",
                 best_case_fidelity(*spectrum, n, rate_strong)},
            };
        });
    }
    RunOutcome out;
    out.rows = run_tasks(std::move(tasks), common.workers, common.experiment);
    return out;
}

RunOutcome run_mixed(const json& cfg, const CommonConfig& common) {
    validate_keys(cfg,
                  {"experiment", "seed", "out", "epsilon", "grid", "gamma_window", "n", "t",
                   "sigma_probs", "omega_probs"},
                  "config");
    const double t = require_number(cfg, "t", "config");
    const auto sigma_probs = require_prob_vector(cfg, "sigma_probs", "config");
    const auto omega_probs = require_prob_vector(cfg, "omega_probs", "config");
    const Matrix sigma = presets::diag_state(sigma_probs);
    const Matrix omega = presets::diag_state(omega_probs);
    const std::string descriptor = "mixed(t=" + format_param(t) + ");eps=" +
                                   format_param(common.epsilon);

    std::vector<Task> tasks;
    for (int n : common.n_list) {
        tasks.push_back([=]() {
            MixedRateEstimate est = mixed_rate_estimate(sigma, omega, t, n, common.estimator());
            return std::vector<ResultRow>{
                {common.experiment, n, common.seed, descriptor, "R_hat", est.optimal_rate},
                {common.experiment, n, common.seed, descriptor, "R_star_hat",
                 est.strong_converse_rate},
                {common.experiment, n, common.seed, descriptor, "S_sup_sigma",
                 est.sigma_est.sup_entropy},
                {common.experiment, n, common.seed, descriptor, "S_inf_sigma",
                 est.sigma_est.inf_entropy},
                {common.experiment, n, common.seed, descriptor, "S_sup_omega",
                 est.omega_est.sup_entropy},
                {common.experiment, n, common.seed, descriptor, "S_inf_omega",
                 est.omega_est.inf_entropy},
                {common.experiment, n, common.seed, descriptor, "S_sup_mixture",
                 est.mixture_est.sup_entropy},
                {common.experiment, n, common.seed, descriptor, "S_inf_mixture",
                 est.mixture_est.inf_entropy},
            };
        });
    }
    RunOutcome out;
    out.rows = run_tasks(std::move(tasks), common.workers, common.experiment);
    return out;
}

RunOutcome run_capacity(const json& cfg, const CommonConfig& common) {
    validate_keys(cfg,
                  {"experiment", "seed", "out", "epsilon", "grid", "gamma_window", "n",
                   "channel", "ensembles"},
                  "config");
    std::string descriptor;
    const KrausChannel channel = parse_channel(cfg, &descriptor);
    if (!cfg.contains("ensembles") || !cfg.at("ensembles").is_array() ||
        cfg.at("ensembles").empty()) {
        throw ConfigError("config: field 'ensembles' must be a nonempty array");
    }
    std::vector<CQEnsemble> candidates;
    for (const auto& e : cfg.at("ensembles")) {
        if (!e.is_object() || !e.contains("kind") || !e.at("kind").is_string()) {
            throw ConfigError("config: each ensemble needs a string 'kind'");
        }
        const std::string kind = e.at("kind").get<std::string>();
        if (kind == "orthogonal_qubit") {
            validate_keys(e, {"kind"}, "ensembles");
            candidates.push_back(presets::orthogonal_qubit_ensemble());
        } else {
            throw ConfigError("config: unknown ensemble kind '" + kind + "'");
        }
    }
    descriptor += ";eps=" + format_param(common.epsilon);

    const CommonConfig c = common;
    const std::string d = descriptor;
    std::vector<Task> tasks;
    tasks.push_back([=]() {
        CapacityEstimate est = capacity_estimate(candidates, channel, c.n_list, c.estimator());
        std::vector<ResultRow> rows;
        for (size_t e = 0; e < est.per_ensemble_per_n.size(); ++e) {
            for (size_t i = 0; i < est.n_sweep.size(); ++i) {
                rows.push_back({c.experiment, est.n_sweep[i], c.seed,
                                d + ";ensemble=" + std::to_string(e), "mi_inf_hat",
                                est.per_ensemble_per_n[e][i]});
            }
        }
        rows.push_back({c.experiment, est.n_sweep.back(), c.seed, d, "capacity",
                        est.capacity});
        return rows;
    });
    RunOutcome out;
    out.rows = run_tasks(std::move(tasks), 1, common.experiment);
    return out;
}

RunOutcome run_densecode(const json& cfg, const CommonConfig& common) {
    validate_keys(cfg,
                  {"experiment", "seed", "out", "epsilon", "grid", "gamma_window", "n",
                   "state", "restarts", "hor_copies", "simulate"},
                  "config");
    std::string descriptor;
    const BipartiteFactor state = parse_state(cfg, &descriptor);
    int restarts = 16;
    if (cfg.contains("restarts")) {
        restarts = static_cast<int>(require_number(cfg, "restarts", "config"));
        if (restarts < 0) throw ConfigError("config: field 'restarts' must be >= 0");
    }
    descriptor += ";eps=" + format_param(common.epsilon) + ";restarts=" +
                  std::to_string(restarts);

    std::vector<Task> tasks;
    for (int n : common.n_list) {
        tasks.push_back([=]() {
            DCCapacity est =
                dc_capacity_estimate(state, n, restarts, common.seed, common.estimator());
            return std::vector<ResultRow>{
                {common.experiment, n, common.seed, descriptor, "C_dc_hat", est.capacity},
                {common.experiment, n, common.seed, descriptor, "min_cond_entropy",
                 est.search.value},
                {common.experiment, n, common.seed, descriptor, "eval_n",
                 static_cast<double>(est.search.eval_n)},
                {common.experiment, n, common.seed, descriptor, "winning_restart",
                 static_cast<double>(est.search.winning_restart)},
            };
        });
    }
    if (cfg.contains("hor_copies")) {
        if (!cfg.at("hor_copies").is_array()) {
            throw ConfigError("config: field 'hor_copies' must be an array");
        }
        for (const auto& v : cfg.at("hor_copies")) {
            if (!v.is_number_integer() || v.get<int>() < 1) {
                throw ConfigError("config: 'hor_copies' must contain positive integers");
            }
            const int copies = v.get<int>();
            tasks.push_back([=]() {
                HorEvaluation hor = hor_capacity(state, copies, restarts, common.seed);
                return std::vector<ResultRow>{
                    {common.experiment, copies, common.seed, descriptor + ";benchmark=iid",
                     "C_hor", hor.capacity},
                };
            });
        }
    }
    if (cfg.contains("simulate")) {
        const json& sim = cfg.at("simulate");
        validate_keys(sim, {"m", "gamma", "n"}, "simulate");
        const int m = static_cast<int>(require_number(sim, "m", "simulate"));
        const double gamma = require_number(sim, "gamma", "simulate");
        const int sim_n = static_cast<int>(require_number(sim, "n", "simulate"));
        tasks.push_back([=]() {
            DCSimulation s = dc_simulate(state, KrausChannel::identity_channel(state.dim_a),
                                         sim_n, m, gamma, common.seed);
            const std::string d2 = descriptor + ";sim(m=" + std::to_string(m) +
                                   ";gamma=" + format_param(gamma) + ")";
            return std::vector<ResultRow>{
                {common.experiment, sim_n, common.seed, d2, "sim_p_e", s.p_e},
                {common.experiment, sim_n, common.seed, d2, "sim_hn_bound",
                 s.hn_bound_adapted},
            };
        });
    }
    RunOutcome out;
    out.rows = run_tasks(std::move(tasks), common.workers, common.experiment);
    return out;
}

// ---------------------------------------------------------------------------
// verification suites

struct SuiteResult {
    int checks = 0;
    int failures = 0;
};

SuiteResult suite_operator_lemmas(int instances, std::uint64_t seed) {
    SuiteResult r;
    for (int i = 0; i < instances; ++i) {
        auto rng = make_rng(derive_seed(seed, 0x6c31ULL, i));
        std::uniform_int_distribution<int> dim_dist(2, 8);
        const int d = dim_dist(rng);
        const Matrix a = random_hermitian(d, rng);
        const Matrix b = random_hermitian(d, rng);
        const Matrix p = random_effect(d, rng);
        const Matrix diff = a - b;
        const Projector proj = relative_projection(a, b, Relation::Geq);
        const double rhs = (proj.matrix() * diff).trace().real();
        const double lhs = (p * diff).trace().real();
        ++r.checks;
        if (!(lhs <= rhs + 1e-9)) ++r.failures;

        // rhs equals the sum of nonnegative eigenvalues of a - b
        EigSystem es = eig(diff);
        double pos_sum = 0.0;
        for (int k = 0; k < es.eigenvalues.size(); ++k) {
            if (es.eigenvalues[k] >= 0.0) pos_sum += es.eigenvalues[k];
        }
        ++r.checks;
        if (std::abs(rhs - pos_sum) > 1e-9) ++r.failures;

        const KrausChannel t = random_cptp(d, d, 2, derive_seed(seed, 0x6c32ULL, i));
        const Matrix ta = t.apply_matrix(a), tb = t.apply_matrix(b);
        const Projector tp = relative_projection(ta, tb, Relation::Geq);
        const double lhs2 = (tp.matrix() * (ta - tb)).trace().real();
        ++r.checks;
        if (!(lhs2 <= rhs + 1e-9)) ++r.failures;

        const DensityMatrix rho = random_density(d, rng);
        const Matrix omega = random_psd(d, rng);
        std::uniform_real_distribution<double> gamma_dist(-1.0, 1.0);
        const double gamma = gamma_dist(rng);
        const int n = 1 + (i % 3);
        const double scale = std::exp(n * gamma);
        const Projector above = relative_projection(rho.matrix(), Matrix(scale * omega),
                                                    Relation::Geq);
        const double lhs3 = (above.matrix() * omega).trace().real();
        ++r.checks;
        if (!(lhs3 <= std::exp(-static_cast<double>(n) * gamma) + 1e-9)) ++r.failures;
    }
    return r;
}

SuiteResult suite_fastpath(int instances, std::uint64_t seed) {
    SuiteResult r;
    for (int i = 0; i < instances; ++i) {
        auto rng = make_rng(derive_seed(seed, 0xfa57ULL, i));
        std::uniform_int_distribution<int> d_dist(2, 3);
        std::uniform_real_distribution<double> gamma_dist(-1.5, 0.5);
        std::uniform_real_distribution<double> unif(0.05, 1.0);
        const int d = d_dist(rng);
        const int n = 1 + static_cast<int>(make_rng(derive_seed(seed, 0xfa58ULL, i))() %
                                           (d == 2 ? 6 : 4));
        const Matrix basis = random_unitary(d, rng);

        std::vector<double> rp(d), wp(d);
        double rsum = 0.0;
        for (int k = 0; k < d; ++k) {
            rp[k] = unif(rng);
            rsum += rp[k];
            wp[k] = unif(rng);
        }
        Matrix rho_f = Matrix::Zero(d, d), ref_f = Matrix::Zero(d, d);
        std::vector<std::pair<double, double>> eigs;
        for (int k = 0; k < d; ++k) {
            rp[k] /= rsum;
            rho_f += rp[k] * basis.col(k) * basis.col(k).adjoint();
            ref_f += wp[k] * basis.col(k) * basis.col(k).adjoint();
            eigs.emplace_back(rp[k], wp[k]);
        }
        rho_f = 0.5 * (rho_f + rho_f.adjoint());
        ref_f = 0.5 * (ref_f + ref_f.adjoint());

        const double gamma = gamma_dist(rng);
        const double fast = product_trace_fastpath(eigs, n, gamma);
        const double dense =
            difference_trace(kron_power(rho_f, n), kron_power(ref_f, n), n, gamma);
        ++r.checks;
        if (std::abs(fast - dense) > 1e-9) ++r.failures;
    }
    return r;
}

SuiteResult suite_twirl(std::uint64_t seed) {
    SuiteResult r;
    for (int d : {2, 3, 4}) {
        auto rng = make_rng(derive_seed(seed, 0x7731ULL, d));
        const int db = 2;
        const DensityMatrix rho = random_density(d * db, rng);
        const Matrix twirled = weyl_twirl(rho.matrix(), d, db);
        const Matrix rho_b = partial_trace(rho.matrix(), SubsystemShape{{d, db}}, {1});
        const Matrix expected = tensor(Matrix::Identity(d, d) / d, rho_b);
        ++r.checks;
        if ((twirled - expected).cwiseAbs().maxCoeff() > 1e-9) ++r.failures;

        // Full randomization on a non-state operator as well.
        const Matrix x = random_hermitian(d, rng);
        Matrix acc = Matrix::Zero(d, d);
        const WeylSet ws(d);
        for (const Matrix& u : ws.all()) acc += u * x * u.adjoint();
        acc /= static_cast<double>(d * d);
        const Matrix target = (x.trace() / static_cast<double>(d)) * Matrix::Identity(d, d);
        ++r.checks;
        if ((acc - target).cwiseAbs().maxCoeff() > 1e-9) ++r.failures;
    }
    return r;
}

SuiteResult suite_channel_invariants(int instances, std::uint64_t seed) {
    SuiteResult r;
    for (int i = 0; i < instances; ++i) {
        auto rng = make_rng(derive_seed(seed, 0xc4a1ULL, i));
        std::uniform_int_distribution<int> dim_dist(2, 5);
        const int d = dim_dist(rng);
        const KrausChannel phi = random_cptp(d, d, 2, derive_seed(seed, 0xc4a2ULL, i));
        Matrix sum = Matrix::Zero(d, d);
        for (const Matrix& k : phi.kraus()) sum += k.adjoint() * k;
        ++r.checks;
        if ((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-9) ++r.failures;

        const DensityMatrix rho = random_density(d, rng);
        const DensityMatrix out = phi.apply(rho);
        ++r.checks;
        if (std::abs(out.trace() - 1.0) > 1e-9) ++r.failures;

        const double f = entanglement_fidelity(rho, phi);
        ++r.checks;
        if (!(f >= -1e-10 && f <= 1.0 + 1e-10)) ++r.failures;

        // Fidelity on a pure state equals the direct expectation.
        const Vector psi = random_pure_ket(d, rng);
        const DensityMatrix pure(psi * psi.adjoint());
        const double f_pure = entanglement_fidelity(pure, phi);
        const double expect = (psi.adjoint() * phi.apply_matrix(pure.matrix()) * psi)(0, 0).real();
        ++r.checks;
        if (std::abs(f_pure - expect) > 1e-9) ++r.failures;
    }
    return r;
}

SuiteResult suite_pgm_bound(int instances, std::uint64_t seed) {
    SuiteResult r;
    for (int i = 0; i < instances; ++i) {
        auto rng = make_rng(derive_seed(seed, 0x9c3dULL, i));
        std::uniform_int_distribution<int> dim_dist(2, 4);
        std::uniform_int_distribution<int> size_dist(2, 4);
        std::uniform_int_distribution<int> m_dist(1, 4);
        std::uniform_real_distribution<double> gamma_dist(0.05, 1.2);
        const int d = dim_dist(rng);
        const int states = size_dist(rng);
        std::vector<double> priors(states, 1.0 / states);
        std::vector<Matrix> rhos;
        for (int s = 0; s < states; ++s) rhos.push_back(random_density(d, rng).matrix());
        const CQEnsemble ens(priors, rhos);
        const int m = m_dist(rng);
        const double gamma = gamma_dist(rng);
        const int n = 1;
        try {
            const CodeBook cb = pgm_codebook(ens, n, m, gamma, derive_seed(seed, 0x9c3eULL, i));
            const double pe = average_error(cb, ens);
            const double bound = hn_bound(ens, n, gamma, m);
            ++r.checks;
            if (!(pe <= bound + 1e-9)) ++r.failures;
        } catch (const std::runtime_error&) {
            // Threshold above every state: the lemma bound is vacuous there.
            ++r.checks;
        }
    }
    return r;
}

SuiteResult suite_converse_bound(int instances, std::uint64_t seed) {
    SuiteResult r;
    for (int i = 0; i < instances; ++i) {
        auto rng = make_rng(derive_seed(seed, 0xc0b1ULL, i));
        std::uniform_int_distribution<int> dim_dist(2, 3);
        std::uniform_int_distribution<int> m_dist(2, 4);
        std::uniform_real_distribution<double> gamma_dist(-0.3, 0.8);
        const int d = dim_dist(rng);
        const int m = m_dist(rng);
        const int labels = 4;
        std::vector<Matrix> rhos;
        for (int s = 0; s < labels; ++s) rhos.push_back(random_density(d, rng).matrix());

        // Codebook drawn from the uniform family; uniform message prior.
        std::vector<int> codewords(m);
        std::uniform_int_distribution<int> pick(0, labels - 1);
        for (int k = 0; k < m; ++k) codewords[k] = pick(rng);
        std::vector<double> priors(m, 1.0 / m);
        std::vector<Matrix> cw_states;
        for (int k = 0; k < m; ++k) cw_states.push_back(rhos[codewords[k]]);
        const CQEnsemble code_ens(priors, cw_states);
        const Matrix joint = code_ens.cq_state();
        const double gamma = gamma_dist(rng);
        const double bound =
            converse_error_bound(joint, SubsystemShape{{m, d}}, 1, gamma, m);

        // Any decoder must respect the bound; try the PGM and a random POVM.
        double pe_pgm = 1.0;
        try {
            const POVM pgm = pgm_decoder(cw_states, code_ens.average(), 1, 0.1);
            double success = 0.0;
            for (int k = 0; k < m; ++k) {
                success += (cw_states[k] * pgm.elements()[k]).trace().real();
            }
            pe_pgm = 1.0 - success / m;
        } catch (const std::runtime_error&) {
        }
        ++r.checks;
        if (!(pe_pgm >= bound - 1e-9)) ++r.failures;

        Matrix s = Matrix::Zero(d, d);
        std::vector<Matrix> effects;
        for (int k = 0; k < m; ++k) {
            effects.push_back(random_psd(d, rng));
            s += effects[k];
        }
        EigSystem es = eig(s);
        Matrix inv_sqrt = Matrix::Zero(d, d);
        for (int k = 0; k < d; ++k) {
            if (es.eigenvalues[k] > 1e-12) {
                inv_sqrt += (1.0 / std::sqrt(es.eigenvalues[k])) * es.eigenvectors.col(k) *
                            es.eigenvectors.col(k).adjoint();
            }
        }
        double success = 0.0;
        for (int k = 0; k < m; ++k) {
            Matrix e = inv_sqrt * effects[k] * inv_sqrt;
            success += (cw_states[k] * e).trace().real();
        }
        const double pe_rand = 1.0 - success / m;
        ++r.checks;
        if (!(pe_rand >= bound - 1e-9)) ++r.failures;
    }
    return r;
}

RunOutcome run_verify(const json& cfg, const CommonConfig& common) {
    validate_keys(cfg, {"experiment", "seed", "out", "suites", "instances"}, "config");
    int instances = 200;
    if (cfg.contains("instances")) {
        instances = static_cast<int>(require_number(cfg, "instances", "config"));
        if (instances < 1) throw ConfigError("config: 'instances' must be positive");
    }
    std::vector<std::string> suites = {"operator_lemmas", "fastpath",      "twirl",
                                       "channel_invariants", "pgm_bound", "converse_bound"};
    if (cfg.contains("suites")) {
        if (!cfg.at("suites").is_array()) throw ConfigError("config: 'suites' must be an array");
        suites.clear();
        for (const auto& s : cfg.at("suites")) {
            if (!s.is_string()) throw ConfigError("config: suite names must be strings");
            suites.push_back(s.get<std::string>());
        }
    }

    std::vector<Task> tasks;
    for (const std::string& suite : suites) {
        tasks.push_back([=]() -> std::vector<ResultRow> {
            SuiteResult sr;
            if (suite == "operator_lemmas") {
                sr = suite_operator_lemmas(instances, common.seed);
            } else if (suite == "fastpath") {
                sr = suite_fastpath(instances, common.seed);
            } else if (suite == "twirl") {
                sr = suite_twirl(common.seed);
            } else if (suite == "channel_invariants") {
                sr = suite_channel_invariants(instances, common.seed);
            } else if (suite == "pgm_bound") {
                sr = suite_pgm_bound(instances, common.seed);
            } else if (suite == "converse_bound") {
                sr = suite_converse_bound(instances, common.seed);
            } else {
                throw ConfigError("config: unknown suite '" + suite + "'");
            }
            return std::vector<ResultRow>{
                {common.experiment, 0, common.seed, "suite=" + suite, "checks",
                 static_cast<double>(sr.checks)},
                {common.experiment, 0, common.seed, "suite=" + suite, "failures",
                 static_cast<double>(sr.failures)},
            };
        });
    }
    RunOutcome out;
    out.rows = run_tasks(std::move(tasks), common.workers, common.experiment);
    for (const ResultRow& row : out.rows) {
        if (row.metric == "failures") out.failures += static_cast<int>(row.value);
        if (row.metric == "error") ++out.failures;
    }
    return out;
}

RunOutcome dispatch(const json& cfg, const std::string& expected_experiment,
                    const CliOverrides& overrides) {
    if (!cfg.is_object()) throw ConfigError("config: top level must be an object");
    CommonConfig common = parse_common(
        cfg, /*needs_n=*/false, /*needs_window=*/false);
    if (!expected_experiment.empty() && common.experiment != expected_experiment) {
        throw ConfigError("config: experiment '" + common.experiment +
                          "' does not match subcommand '" + expected_experiment + "'");
    }
    if (overrides.seed) common.seed = *overrides.seed;
    if (overrides.workers) common.workers = std::max(1, *overrides.workers);

    const std::string kind = common.experiment;
    RunOutcome out;
    if (kind == "spectrum") {
        if (common.n_list.empty()) throw ConfigError("config: field 'n' is required");
        out = run_spectrum(cfg, common);
    } else if (kind == "compress") {
        if (common.n_list.empty()) throw ConfigError("config: field 'n' is required");
        out = run_compress(cfg, common);
    } else if (kind == "mixed") {
        if (common.n_list.empty()) throw ConfigError("config: field 'n' is required");
        out = run_mixed(cfg, common);
    } else if (kind == "capacity") {
        if (common.n_list.empty()) throw ConfigError("config: field 'n' is required");
        out = run_capacity(cfg, common);
    } else if (kind == "densecode") {
        if (common.n_list.empty()) throw ConfigError("config: field 'n' is required");
        out = run_densecode(cfg, common);
    } else if (kind == "verify") {
        out = run_verify(cfg, common);
    } else {
        throw ConfigError("config: unknown experiment '" + kind + "'");
    }
    for (const ResultRow& row : out.rows) {
        if (row.metric == "error") ++out.failures;
    }
    sort_rows(out.rows);
    return out;
}

json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: JSON parse error: ") + e.what());
    }
}

} // namespace

RunOutcome run_config_text(const std::string& text, const std::string& expected_experiment,
                           const CliOverrides& overrides) {
    return dispatch(parse_json_text(text), expected_experiment, overrides);
}

RunOutcome run_config_file(const std::string& path, const std::string& expected_experiment,
                           const CliOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return run_config_text(buffer.str(), expected_experiment, overrides);
}

RunOutcome run_default_verify(int workers, std::uint64_t seed) {
    json cfg = {{"experiment", "verify"}, {"seed", seed}};
    CliOverrides overrides;
    overrides.workers = workers;
    return dispatch(cfg, "verify", overrides);
}

std::string csv_string(const std::vector<ResultRow>& rows) {
    std::string out = "experiment,n,seed,params,metric,value\n";
    for (const ResultRow& row : rows) {
        out += row.experiment + "," + std::to_string(row.n) + "," + std::to_string(row.seed) +
               "," + row.params + "," + row.metric + "," + format_value(row.value) + "\n";
    }
    return out;
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_csv: cannot open '" + path + "' for writing");
    const std::string text = csv_string(rows);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("emit_csv: write failed for '" + path + "'");
}

std::optional<std::string> configured_out(const std::string& path, const CliOverrides& o) {
    if (o.out) return o.out;
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::stringstream buffer;
    buffer << in.rdbuf();
    json cfg = parse_json_text(buffer.str());
    if (cfg.is_object() && cfg.contains("out") && cfg.at("out").is_string()) {
        return cfg.at("out").get<std::string>();
    }
    return std::nullopt;
}

} // namespace qspec::harness
