#pragma once

#include <vector>

namespace accord::harness {

struct TTestResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;  // two-tailed
    double cohens_d = 0.0;
    double mean_a = 0.0;
    double mean_b = 0.0;
};

// Welch's two-tailed t-test with Cohen's d (pooled standard deviation).
TTestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace accord::harness
