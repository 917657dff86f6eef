#include <cstdio>
#include <cstring>
#include <string>

#include "qpur/verify.hpp"

// Usage: acceptance [--full] [--tamper-mub] [--threads N] [--only C<k>]...
int main(int argc, char** argv) {
    qpur::VerifyOptions opt;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--full")) opt.full = true;
        else if (!std::strcmp(argv[i], "--tamper-mub")) opt.tamper_mub = true;
        else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) opt.only.push_back(argv[++i]);
        else if (!std::strcmp(argv[i], "--threads") && i + 1 < argc) opt.threads = std::stoi(argv[++i]);
        else {
            std::fprintf(stderr, "unknown argument %s\n", argv[i]);
            return 2;
        }
    }
    int failed = 0;
    for (const auto& r : qpur::run_acceptance(opt)) {
        std::printf("%s\n", qpur::summary_line(r).c_str());
        std::fflush(stdout);
        failed += !r.passed;
    }
    return failed ? 1 : 0;
}
