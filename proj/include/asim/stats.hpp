#pragma once

#include <string>
#include <vector>

namespace asim {

// Regularized incomplete beta I_x(a, b) by continued fraction (the usual
// symmetry split keeps the fraction convergent); absolute accuracy ~1e-10.
double incbeta(double a, double b, double x);

// Upper tail P(F' > f) of the F distribution with (d1, d2) dof.
double f_sf(double f, double d1, double d2);

// Cohen's d from partial eta squared: d = 2*sqrt(eta2/(1-eta2)).
double cohen_d_from_eta(double eta_sq);

double mean_of(const std::vector<double>& xs);    // throws on empty
double sample_sd(const std::vector<double>& xs);  // n-1 denominator; 0 for n < 2

struct GroupStat {
    std::string label;
    int n = 0;
    double mean = 0.0;
    double sd = 0.0;  // sample SD (n-1)
};

struct AnovaResult {
    double F = 0.0;
    int df_between = 0;
    int df_within = 0;
    double p = 1.0;
    double eta_p_sq = 0.0;
    double d = 0.0;
    std::vector<GroupStat> groups;
    bool degenerate = false;  // zero within-group variance
};

// Classic one-way ANOVA. Requires >= 2 groups with >= 2 samples each (throws
// validation_error otherwise). Zero within-group variance is flagged
// degenerate: p = 0 when the means differ, p = 1 when they coincide.
AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups,
                          const std::vector<std::string>& labels = {});

}  // namespace asim
