#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace qpur {

struct Measurement {
    std::string name;
    double value = 0.0;
    double target = 0.0;  // centre of the accepted interval
    double tol = 0.0;     // half width; inf for one-sided checks
    std::string relation; // "within", "<=", ">=", "in"
    bool pass = false;
};

struct CheckResult {
    std::string id;  // "C1".."C14"
    std::string title;
    std::vector<Measurement> values;
    bool passed = false;
    std::string error;  // kind: message, when the check threw
    double seconds = 0.0;
};

struct VerifyOptions {
    bool full = false;
    int threads = 0;
    std::uint64_t seed = 20240601;
    std::vector<std::string> only;  // empty: all
    bool tamper_mub = false;        // negative test for C10
};

const std::vector<std::string>& acceptance_ids();
CheckResult run_check(const std::string& id, const VerifyOptions& opt);
std::vector<CheckResult> run_acceptance(const VerifyOptions& opt);

std::string summary_line(const CheckResult& r);
nlohmann::json to_json(const CheckResult& r);
nlohmann::json report_json(const std::vector<CheckResult>& rs, const VerifyOptions& opt);

} // namespace qpur
