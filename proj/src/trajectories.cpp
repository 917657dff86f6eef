#include "qpur/trajectories.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "qpur/errors.hpp"
#include "qpur/feedback.hpp"

namespace qpur {

Protocol parse_protocol(const std::string& s) {
    if (s == "commuting" || s == "none") return Protocol::Commuting;
    if (s == "qft") return Protocol::QftComplementary;
    if (s == "mub") return Protocol::MubComplementary;
    if (s == "worst") return Protocol::WorstPermutation;
    if (s == "register-qft") return Protocol::RegisterQft;
    if (s == "register-random") return Protocol::RegisterRandomPermutation;
    throw InvalidArgument("unknown protocol: " + s);
}

const char* to_string(Protocol p) {
    switch (p) {
    case Protocol::Commuting: return "commuting";
    case Protocol::QftComplementary: return "qft";
    case Protocol::MubComplementary: return "mub";
    case Protocol::WorstPermutation: return "worst";
    case Protocol::RegisterQft: return "register-qft";
    case Protocol::RegisterRandomPermutation: return "register-random";
    }
    return "?";
}

bool is_register(Protocol p) {
    return p == Protocol::RegisterQft || p == Protocol::RegisterRandomPermutation;
}

MeasurementModel MeasurementModel::qudit(int D, double gamma) {
    return {{jz_operator(D)}, gamma};
}

MeasurementModel MeasurementModel::qubit_register(int n, double kappa) {
    return {register_observables(n), kappa};
}

bool MeasurementModel::diagonal() const {
    for (const Mat& X : observables) {
        Mat off = X;
        off.diagonal().setZero();
        if (off.cwiseAbs().maxCoeff() > 0.0) return false;
    }
    return true;
}

void MeasurementModel::validate() const {
    if (observables.empty()) throw InvalidArgument("measurement model has no observables");
    if (!(rate > 0.0)) throw InvalidArgument("measurement rate must be positive");
    for (const Mat& X : observables) {
        validate_observable(X);
        if (X.rows() != observables.front().rows()) throw DimensionMismatch("observables differ in dimension");
    }
}

MeasurementModel TrajectoryConfig::model() const {
    if (qubits > 0) return MeasurementModel::qubit_register(qubits, gamma);
    return MeasurementModel::qudit(dim, gamma);
}

void TrajectoryConfig::validate() const {
    if (qubits < 0 || qubits > 8) throw InvalidArgument("qubits must be in 0..8");
    if (qubits == 0 && dim < 2) throw InvalidDimension("dimension must be >= 2");
    if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
    if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
    if (!(t_final >= dt)) throw InvalidArgument("t_final must be >= dt");
    if (fb_interval < 0.0) throw InvalidArgument("feedback interval must be >= 0");
    if (protocol != Protocol::Commuting && fb_interval > 0.0 && fb_interval < dt)
        throw InvalidArgument("feedback interval must be >= dt");
    if (protocol != Protocol::Commuting && fb_interval == 0.0)
        throw InvalidArgument("feedback protocols need a positive feedback interval");
    if (is_register(protocol) && qubits == 0) throw InvalidArgument("register protocols need --qubits");
    if (!is_register(protocol) && protocol != Protocol::Commuting && qubits > 0)
        throw InvalidArgument("qudit protocols cannot run on a register");
    if (protocol == Protocol::MubComplementary && (D() != 4 || mub_index < 1 || mub_index > 4))
        throw InvalidArgument("MUB protocol needs D = 4 and basis index 1..4");
    if (ensemble < 1) throw InvalidArgument("ensemble size must be >= 1");
    if (!(sample_interval >= dt)) throw InvalidArgument("sample interval must be >= dt");
    for (double q : quantiles)
        if (q < 0.0 || q > 1.0) throw InvalidArgument("quantiles must lie in [0, 1]");
}

Mat repair_state(const Mat& rho_in) {
    Mat rho = symmetrize(rho_in);
    double tr = rho.trace().real();
    if (!std::isfinite(tr) || tr <= 0.0)
        throw IntegrationBlowup("state trace is not positive after a step; reduce dt");
    rho /= tr;
    const int D = static_cast<int>(rho.rows());
    Eigen::LLT<Mat> llt(rho + 1e-12 * Mat::Identity(D, D));
    if (llt.info() == Eigen::Success) return rho;
    Eigen::SelfAdjointEigenSolver<Mat> es(rho);
    Vec w = es.eigenvalues().cwiseMax(0.0);
    if (!(w.sum() > 0.0)) throw IntegrationBlowup("state lost positivity beyond repair; reduce dt");
    w /= w.sum();
    Mat out = es.eigenvectors() * w.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    return symmetrize(out);
}

Mat step_nonlinear(const Mat& rho, const MeasurementModel& model, double dt, const std::vector<double>& dW) {
    if (dW.size() != model.observables.size()) throw DimensionMismatch("one dW per channel required");
    const double g = model.rate;
    const double sg = std::sqrt(2.0 * g);
    Mat out = rho;
    if (model.diagonal()) {
        const int D = static_cast<int>(rho.rows());
        Eigen::ArrayXXd factor = Eigen::ArrayXXd::Zero(D, D);
        for (size_t r = 0; r < model.observables.size(); ++r) {
            const Vec x = model.observables[r].diagonal().real();
            double ex = 0.0;
            for (int a = 0; a < D; ++a) ex += x(a) * rho(a, a).real();
            for (int a = 0; a < D; ++a)
                for (int b = 0; b < D; ++b) {
                    const double d = x(a) - x(b);
                    factor(a, b) += -g * dt * d * d + sg * dW[r] * (x(a) + x(b) - 2.0 * ex);
                }
        }
        out.array() += factor.cast<cplx>() * rho.array();
    } else {
        for (size_t r = 0; r < model.observables.size(); ++r) {
            const Mat& X = model.observables[r];
            const double ex = (X * rho).trace().real();
            const Mat Xr = X * rho, rX = rho * X;
            out += 2.0 * g * dt * (X * rho * X - 0.5 * (X * Xr + rX * X)) + sg * dW[r] * (Xr + rX - 2.0 * ex * rho);
        }
    }
    return repair_state(out);
}

Mat step_linear(const Mat& rhobar, const MeasurementModel& model, double dt, const std::vector<double>& dR) {
    if (dR.size() != model.observables.size()) throw DimensionMismatch("one dR per channel required");
    const double g = model.rate;
    const double sg = std::sqrt(2.0 * g);
    const int D = static_cast<int>(rhobar.rows());
    if (model.diagonal()) {
        Vec m = Vec::Zero(D);
        for (size_t r = 0; r < model.observables.size(); ++r) {
            const Vec x = model.observables[r].diagonal().real();
            m += (-2.0 * g * dt * x.array().square() + sg * dR[r] * x.array()).matrix();
        }
        const Vec M = m.array().exp().matrix();
        Mat out = rhobar;
        for (int a = 0; a < D; ++a)
            for (int b = 0; b < D; ++b) out(a, b) *= M(a) * M(b);
        return out;
    }
    Mat out = rhobar;
    for (size_t r = 0; r < model.observables.size(); ++r) {
        Eigen::SelfAdjointEigenSolver<Mat> es(model.observables[r]);
        const Vec& x = es.eigenvalues();
        const Vec M = (-2.0 * g * dt * x.array().square() + sg * dR[r] * x.array()).exp().matrix();
        const Mat K = es.eigenvectors() * M.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
        out = K * out * K.adjoint();
    }
    return out;
}

RecordIncrement generate_record_increment(const Mat& rho, const MeasurementModel& model, double dt,
                                          PhiloxStream& rng) {
    RecordIncrement inc;
    const double sdt = std::sqrt(dt);
    const double drift = std::sqrt(8.0 * model.rate) * dt;
    for (const Mat& X : model.observables) {
        const double w = sdt * rng.normal();
        const double ex = (X * rho).trace().real();
        inc.dW.push_back(w);
        inc.dR.push_back(drift * ex + w);
    }
    return inc;
}

FeedbackContext FeedbackContext::make(const TrajectoryConfig& cfg) {
    FeedbackContext ctx;
    ctx.protocol = cfg.protocol;
    const int D = cfg.D();
    const MeasurementModel model = cfg.model();
    switch (cfg.protocol) {
    case Protocol::Commuting:
        throw InvalidArgument("commuting protocol has no feedback");
    case Protocol::MubComplementary:
        ctx.U = mub_basis_d4_canonical(cfg.mub_index);
        break;
    default:
        ctx.U = qft_matrix(D);
        break;
    }
    ctx.W = RMat::Zero(D, D);
    for (const Mat& X : model.observables) ctx.W += weight_matrix(effective_observable(ctx.U, X));
    return ctx;
}

Permutation FeedbackContext::choose(const Vec& ranked, PhiloxStream* rng) const {
    const int D = static_cast<int>(ranked.size());
    switch (protocol) {
    case Protocol::QftComplementary:
        return conjectured_optimal_permutation(D);
    case Protocol::WorstPermutation:
        return worst_permutation(ranked, W);
    case Protocol::MubComplementary:
    case Protocol::RegisterQft:
        return optimal_permutation(ranked, W, PermutationMode::Exhaustive).perm;
    case Protocol::RegisterRandomPermutation: {
        if (!rng) throw InvalidArgument("random permutation protocol needs an RNG stream");
        std::vector<int> m(D);
        for (int i = 0; i < D; ++i) m[i] = i;
        for (int i = D - 1; i > 0; --i) std::swap(m[i], m[rng->below(static_cast<std::uint32_t>(i + 1))]);
        return Permutation(std::move(m));
    }
    case Protocol::Commuting:
        break;
    }
    throw InvalidArgument("commuting protocol has no feedback");
}

FeedbackResult apply_feedback(const Mat& rho, const FeedbackContext& ctx, PhiloxStream* rng) {
    const Eig eig = eigendecompose_descending(rho);
    FeedbackResult out;
    out.perm = ctx.choose(eig.values, rng);
    out.U_applied = ctx.U * permutation_matrix(out.perm) * eig.vectors.adjoint();
    out.rho = symmetrize(out.U_applied * rho * out.U_applied.adjoint());
    return out;
}

namespace {

struct Sampler {
    TrajectoryRecord rec;
    double R = 0.0, dR_acc = 0.0, vscale = 1.0;
    void push(double t, double L) {
        rec.times.push_back(t);
        rec.dR.push_back(dR_acc);
        rec.R.push_back(R);
        rec.V.push_back(t > 0.0 ? R / (vscale * t) : 0.0);
        rec.impurity.push_back(L);
        rec.log_impurity.push_back(std::log10(std::max(L, 1e-300)));
        dR_acc = 0.0;
    }
};

long steps_of(double span, double dt) { return std::lround(span / dt); }

} // namespace

TrajectoryRecord run_trajectory(const TrajectoryConfig& cfg, std::uint64_t index) {
    cfg.validate();
    const MeasurementModel model = cfg.model();
    const int D = cfg.D();
    const long nsteps = steps_of(cfg.t_final, cfg.dt);
    const long sample_every = std::max(1L, steps_of(cfg.sample_interval, cfg.dt));
    const long fb_every = (cfg.protocol == Protocol::Commuting) ? 0 : std::max(1L, steps_of(cfg.fb_interval, cfg.dt));
    PhiloxStream noise(cfg.seed, index, 0);
    PhiloxStream perm_rng(cfg.seed, index, 1);

    Sampler s;
    s.vscale = 2.0 * std::sqrt(2.0 * model.rate);
    s.rec.times.reserve(nsteps / sample_every + 2);
    s.push(0.0, 1.0 - 1.0 / D);

    const double g = model.rate, sg = std::sqrt(2.0 * g), sdt = std::sqrt(cfg.dt);
    const double drift = std::sqrt(8.0 * g) * cfg.dt;

    if (cfg.protocol == Protocol::Commuting && model.diagonal()) {
        // populations only: a diagonal state stays diagonal
        const int C = static_cast<int>(model.observables.size());
        std::vector<Vec> xs;
        for (const Mat& X : model.observables) xs.push_back(X.diagonal().real());
        Vec p = Vec::Constant(D, 1.0 / D);
        std::vector<double> dW(C), dR(C);
        for (long k = 0; k < nsteps; ++k) {
            Vec f = Vec::Zero(D);
            for (int r = 0; r < C; ++r) {
                const double ex = xs[r].dot(p);
                dW[r] = sdt * noise.normal();
                dR[r] = drift * ex + dW[r];
                if (cfg.simulate_linear)
                    f += (-4.0 * g * cfg.dt * xs[r].array().square() + 2.0 * sg * dR[r] * xs[r].array()).matrix();
                else
                    f += (2.0 * sg * dW[r] * (xs[r].array() - ex)).matrix();
            }
            if (cfg.simulate_linear)
                p = (p.array() * f.array().exp()).matrix();
            else
                p = (p.array() * (1.0 + f.array())).matrix().cwiseMax(0.0);
            const double tr = p.sum();
            if (!std::isfinite(tr) || tr <= 0.0) throw IntegrationBlowup("populations collapsed; reduce dt");
            p /= tr;
            s.R += dR[0];
            s.dR_acc += dR[0];
            if ((k + 1) % sample_every == 0) s.push((k + 1) * cfg.dt, impurity_of_spectrum(p));
        }
        return std::move(s.rec);
    }

    const FeedbackContext ctx = fb_every ? FeedbackContext::make(cfg) : FeedbackContext{};
    Mat rho = maximally_mixed(D);
    for (long k = 0; k < nsteps; ++k) {
        if (fb_every && k % fb_every == 0) rho = apply_feedback(rho, ctx, &perm_rng).rho;
        const RecordIncrement inc = generate_record_increment(rho, model, cfg.dt, noise);
        if (cfg.simulate_linear) {
            Mat next = step_linear(rho, model, cfg.dt, inc.dR);
            const double tr = next.trace().real();
            if (!std::isfinite(tr) || tr <= 0.0) throw IntegrationBlowup("linear state norm collapsed; reduce dt");
            rho = symmetrize(next / tr);
        } else {
            rho = step_nonlinear(rho, model, cfg.dt, inc.dW);
        }
        s.R += inc.dR[0];
        s.dR_acc += inc.dR[0];
        if ((k + 1) % sample_every == 0) s.push((k + 1) * cfg.dt, std::max(0.0, impurity(rho)));
    }
    return std::move(s.rec);
}

double quantile_sorted(const std::vector<double>& v, double q) {
    if (v.empty()) return std::nan("");
    const double h = q * (v.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(h));
    const size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("QP_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

EnsembleResult run_ensemble(const TrajectoryConfig& cfg) {
    cfg.validate();
    const int N = cfg.ensemble;
    std::vector<TrajectoryRecord> recs(N);
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&] {
        for (int k; (k = next.fetch_add(1)) < N;) {
            try {
                recs[k] = run_trajectory(cfg, static_cast<std::uint64_t>(k));
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
                next.store(N);
            }
        }
    };
    const int nt = std::min(resolve_threads(cfg.threads), N);
    std::vector<std::thread> pool;
    for (int i = 1; i < nt; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);

    EnsembleResult out;
    EnsembleStats& st = out.stats;
    st.times = recs.front().times;
    const size_t S = st.times.size();
    for (double q : cfg.quantiles) st.quantiles[q].resize(S);
    std::vector<double> col(N);
    for (size_t i = 0; i < S; ++i) {
        double sum = 0.0, sum_log = 0.0;
        for (int k = 0; k < N; ++k) {
            col[k] = recs[k].impurity[i];
            sum += col[k];
            sum_log += recs[k].log_impurity[i];
        }
        const double mean = sum / N;
        double var = 0.0;
        for (int k = 0; k < N; ++k) var += (col[k] - mean) * (col[k] - mean);
        var = N > 1 ? var / (N - 1) : 0.0;
        st.mean_L.push_back(mean);
        st.mean_log_L.push_back(sum_log / N);
        st.stderr_L.push_back(std::sqrt(var / N));
        std::vector<double> sorted = col;
        std::sort(sorted.begin(), sorted.end());
        st.min_L.push_back(sorted.front());
        st.max_L.push_back(sorted.back());
        for (double q : cfg.quantiles) st.quantiles[q][i] = quantile_sorted(sorted, q);
    }
    for (int k = 0; k < N; ++k) out.final_L.push_back(recs[k].impurity.back());
    if (cfg.keep_records) out.records = std::move(recs);
    return out;
}

} // namespace qpur
