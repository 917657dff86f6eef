#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qpur/qcore.hpp"
#include "qpur/rng.hpp"
#include "qpur/types.hpp"

namespace qpur {

enum class Protocol {
    Commuting,
    QftComplementary,
    MubComplementary,
    WorstPermutation,
    RegisterQft,
    RegisterRandomPermutation
};
Protocol parse_protocol(const std::string& s);
const char* to_string(Protocol p);
bool is_register(Protocol p);

struct MeasurementModel {
    std::vector<Mat> observables;
    double rate = 1.0;  // gamma, or kappa per register channel

    static MeasurementModel qudit(int D, double gamma = 1.0);
    static MeasurementModel qubit_register(int n, double kappa = 1.0);
    int dim() const { return static_cast<int>(observables.front().rows()); }
    bool diagonal() const;
    void validate() const;
};

struct TrajectoryConfig {
    int dim = 3;
    int qubits = 0;  // > 0 selects a register of 2^qubits levels
    double gamma = 1.0;
    double dt = 1e-4;
    double t_final = 1.0;
    double fb_interval = 0.0;  // 0: no feedback
    Protocol protocol = Protocol::Commuting;
    int mub_index = 1;
    int ensemble = 100;
    std::uint64_t seed = 1;
    bool simulate_linear = false;
    double sample_interval = 0.01;
    int threads = 0;  // 0: QP_THREADS or hardware concurrency
    bool keep_records = false;
    std::vector<double> quantiles{0.1, 0.5, 0.9};

    int D() const { return qubits > 0 ? (1 << qubits) : dim; }
    MeasurementModel model() const;
    void validate() const;
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<double> dR;  // record increment accumulated over each sample interval (channel 1)
    std::vector<double> R;
    std::vector<double> V;   // R / (2 sqrt(2 rate) t)
    std::vector<double> impurity;
    std::vector<double> log_impurity;
};

struct EnsembleStats {
    std::vector<double> times;
    std::vector<double> mean_L;
    std::vector<double> mean_log_L;
    std::vector<double> stderr_L;
    std::vector<double> min_L;
    std::vector<double> max_L;
    std::map<double, std::vector<double>> quantiles;
};

struct EnsembleResult {
    EnsembleStats stats;
    std::vector<TrajectoryRecord> records;  // filled when keep_records
    std::vector<double> final_L;            // per trajectory, index order
};

// One Ito step of the nonlinear SME (all channels), then repair.
Mat step_nonlinear(const Mat& rho, const MeasurementModel& model, double dt, const std::vector<double>& dW);
// One step of the linear SME in exponential form; no normalisation.
Mat step_linear(const Mat& rhobar, const MeasurementModel& model, double dt, const std::vector<double>& dR);
// Renormalise and clip negative eigenvalues; throws IntegrationBlowup.
Mat repair_state(const Mat& rho);

struct RecordIncrement {
    std::vector<double> dR;
    std::vector<double> dW;
};
RecordIncrement generate_record_increment(const Mat& rho, const MeasurementModel& model, double dt,
                                          PhiloxStream& rng);

// Control data for one protocol: the unbiased basis U and the observable
// weights W_ab = sum_r |(U^dagger X_r U)_ab|^2 by basis slot.
struct FeedbackContext {
    Protocol protocol = Protocol::QftComplementary;
    Mat U;
    RMat W;
    static FeedbackContext make(const TrajectoryConfig& cfg);
    Permutation choose(const Vec& ranked, PhiloxStream* rng) const;
};

struct FeedbackResult {
    Mat rho;
    Mat U_applied;
    Permutation perm;
};
FeedbackResult apply_feedback(const Mat& rho, const FeedbackContext& ctx, PhiloxStream* rng = nullptr);

TrajectoryRecord run_trajectory(const TrajectoryConfig& cfg, std::uint64_t index);
EnsembleResult run_ensemble(const TrajectoryConfig& cfg);

// Linear interpolation of order statistics (type 7).
double quantile_sorted(const std::vector<double>& sorted, double q);
int resolve_threads(int requested);

} // namespace qpur
