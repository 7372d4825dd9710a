#include "accord/harness/stats.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace accord::harness {

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v, double m) {
    if (v.size() < 2) return 0.0;
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TTestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) {
        throw std::invalid_argument("t-test needs at least two samples per group");
    }
    TTestResult r;
    r.mean_a = mean_of(a);
    r.mean_b = mean_of(b);
    const double va = var_of(a, r.mean_a);
    const double vb = var_of(b, r.mean_b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());

    const double se2 = va / na + vb / nb;
    if (se2 <= 0.0) {
        r.t = r.mean_a == r.mean_b ? 0.0 : std::numeric_limits<double>::infinity();
        r.df = na + nb - 2;
        r.p = r.mean_a == r.mean_b ? 1.0 : 0.0;
    } else {
        r.t = (r.mean_a - r.mean_b) / std::sqrt(se2);
        r.df = se2 * se2 /
               ((va / na) * (va / na) / (na - 1) + (vb / nb) * (vb / nb) / (nb - 1));
        boost::math::students_t dist(r.df);
        r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t)));
    }

    const double pooled =
        std::sqrt(((na - 1) * va + (nb - 1) * vb) / (na + nb - 2));
    r.cohens_d = pooled > 0 ? (r.mean_a - r.mean_b) / pooled : 0.0;
    return r;
}

}  // namespace accord::harness
