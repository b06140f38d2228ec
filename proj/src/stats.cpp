#include "asim/stats.hpp"

#include <cmath>
#include <limits>

#include "asim/error.hpp"

namespace asim {

namespace {

// Lentz's method for the continued fraction of I_x(a,b) (standard betacf
// arrangement with paired even/odd terms).
double beta_cf(double a, double b, double x) {
    constexpr double kEps = 1e-12;
    constexpr double kTiny = 1e-30;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    return h;  // converged to working precision for all sane (a, b)
}

}  // namespace

double incbeta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw validation_error("incbeta: a and b must be positive");
    if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double f_sf(double f, double d1, double d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0)) throw validation_error("f_sf: dof must be positive");
    if (std::isnan(f)) return std::numeric_limits<double>::quiet_NaN();
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    return incbeta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

double cohen_d_from_eta(double eta_sq) {
    if (!(eta_sq >= 0.0 && eta_sq < 1.0)) {
        throw validation_error("cohen_d_from_eta: eta squared must be in [0, 1)");
    }
    return 2.0 * std::sqrt(eta_sq / (1.0 - eta_sq));
}

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) throw validation_error("mean of empty sample");
    double s = 0.0;
    for (double v : xs) s += v;
    return s / static_cast<double>(xs.size());
}

double sample_sd(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double sq = 0.0;
    for (double v : xs) sq += (v - m) * (v - m);
    return std::sqrt(sq / static_cast<double>(xs.size() - 1));
}

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups,
                          const std::vector<std::string>& labels) {
    if (groups.size() < 2) throw validation_error("anova: needs at least 2 groups");
    if (!labels.empty() && labels.size() != groups.size()) {
        throw validation_error("anova: label count does not match group count");
    }

    AnovaResult res;
    size_t total_n = 0;
    double grand_sum = 0.0;
    for (size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].size() < 2) {
            throw validation_error("anova: group " +
                                   (labels.empty() ? std::to_string(g) : labels[g]) +
                                   " needs at least 2 samples");
        }
        total_n += groups[g].size();
        for (double v : groups[g]) grand_sum += v;
    }
    const double grand_mean = grand_sum / static_cast<double>(total_n);

    double ss_between = 0.0;
    double ss_within = 0.0;
    for (size_t g = 0; g < groups.size(); ++g) {
        const auto& xs = groups[g];
        const double n = static_cast<double>(xs.size());
        double sum = 0.0;
        for (double v : xs) sum += v;
        const double mean = sum / n;
        double sq = 0.0;
        for (double v : xs) sq += (v - mean) * (v - mean);
        ss_between += n * (mean - grand_mean) * (mean - grand_mean);
        ss_within += sq;

        GroupStat st;
        st.label = labels.empty() ? std::to_string(g) : labels[g];
        st.n = static_cast<int>(xs.size());
        st.mean = mean;
        st.sd = std::sqrt(sq / (n - 1.0));
        res.groups.push_back(st);
    }

    res.df_between = static_cast<int>(groups.size()) - 1;
    res.df_within = static_cast<int>(total_n) - static_cast<int>(groups.size());
    const double ms_between = ss_between / res.df_between;
    const double ms_within = ss_within / res.df_within;

    if (ms_within <= 0.0) {
        res.degenerate = true;
        if (ss_between > 0.0) {
            res.F = std::numeric_limits<double>::infinity();
            res.p = 0.0;
            res.eta_p_sq = 1.0;
            res.d = std::numeric_limits<double>::infinity();
        } else {
            res.F = 0.0;
            res.p = 1.0;
            res.eta_p_sq = 0.0;
            res.d = 0.0;
        }
        return res;
    }

    res.F = ms_between / ms_within;
    res.p = f_sf(res.F, res.df_between, res.df_within);
    res.eta_p_sq = ss_between / (ss_between + ss_within);
    res.d = cohen_d_from_eta(res.eta_p_sq);
    return res;
}

}  // namespace asim
