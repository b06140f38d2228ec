#pragma once

#include <vector>

#include <Eigen/Dense>

#include "asim/io.hpp"

namespace asim::rl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct LinearLayer {
    Matrix w;  // out x in
    Vector b;  // out
};

// Gaussian policy + value function as two separate tanh trunks. pi layers end
// in the action-mean head, vf layers in the scalar value head; log_std is
// state-independent and learnable.
struct PolicyParams {
    std::vector<LinearLayer> pi;
    std::vector<LinearLayer> vf;
    Vector log_std;

    int obs_dim() const { return static_cast<int>(pi.front().w.cols()); }
    int act_dim() const { return static_cast<int>(pi.back().w.rows()); }
    int hidden_layers() const { return static_cast<int>(pi.size()) - 1; }

    // Scaled-normal init (He-style trunk, 0.01-scaled policy head, zero
    // log_std); deterministic in rng.
    static PolicyParams init(int obs_dim, int act_dim, int hidden, int layers, Rng& rng);
    static PolicyParams zeros_like(const PolicyParams& shape);

    bool finite() const;
    size_t flat_size() const;
    Vector flatten() const;             // pi layers (w row-major, b), vf layers, log_std
    void unflatten(const Vector& flat);
};

struct NetOutput {
    Vector mean;
    double value = 0.0;
};

NetOutput forward(const PolicyParams& p, const Vector& obs);

// Batched forward with cached activations for backprop. Columns are samples.
struct ForwardTrace {
    std::vector<Matrix> pi_h;  // post-tanh activations per hidden layer
    std::vector<Matrix> vf_h;
    Matrix mean;               // act_dim x N
    Vector value;              // N
};

ForwardTrace forward_batch(const PolicyParams& p, const Matrix& obs);

// Accumulates dLoss/dparams into g given head gradients dmean (act_dim x N)
// and dvalue (N); caller owns any 1/N weighting inside those.
void backward_batch(const PolicyParams& p, const Matrix& obs, const ForwardTrace& trace,
                    const Matrix& dmean, const Vector& dvalue, PolicyParams& g);

// Adaptive-moment optimizer over the flattened parameter vector.
class Adam {
public:
    explicit Adam(const PolicyParams& shape, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8);
    void step(PolicyParams& p, const PolicyParams& grads, double lr);
    int64_t t() const { return t_; }

private:
    Vector m_, v_;
    double beta1_, beta2_, eps_;
    int64_t t_ = 0;
};

}  // namespace asim::rl
