#include "asim/rl/mlp.hpp"

#include <cmath>

#include "asim/error.hpp"

namespace asim::rl {

namespace {

LinearLayer init_layer(int out, int in, double scale, Rng& rng) {
    LinearLayer l;
    l.w = Matrix(out, in);
    for (int r = 0; r < out; ++r) {
        for (int c = 0; c < in; ++c) l.w(r, c) = rng.normal() * scale;
    }
    l.b = Vector::Zero(out);
    return l;
}

std::vector<LinearLayer> init_trunk(int in, int hidden, int layers, int head, double head_scale,
                                    Rng& rng) {
    std::vector<LinearLayer> trunk;
    int d = in;
    for (int i = 0; i < layers; ++i) {
        trunk.push_back(init_layer(hidden, d, std::sqrt(2.0 / d), rng));
        d = hidden;
    }
    trunk.push_back(init_layer(head, d, head_scale / std::sqrt(static_cast<double>(d)), rng));
    return trunk;
}

}  // namespace

PolicyParams PolicyParams::init(int obs_dim, int act_dim, int hidden, int layers, Rng& rng) {
    if (obs_dim < 1 || act_dim < 1 || hidden < 1 || layers < 1) {
        throw error("network dimensions must be positive");
    }
    PolicyParams p;
    p.pi = init_trunk(obs_dim, hidden, layers, act_dim, 0.01, rng);
    p.vf = init_trunk(obs_dim, hidden, layers, 1, 1.0, rng);
    p.log_std = Vector::Zero(act_dim);
    return p;
}

PolicyParams PolicyParams::zeros_like(const PolicyParams& shape) {
    PolicyParams g;
    auto zero_trunk = [](const std::vector<LinearLayer>& src) {
        std::vector<LinearLayer> out;
        out.reserve(src.size());
        for (const LinearLayer& l : src) {
            out.push_back({Matrix::Zero(l.w.rows(), l.w.cols()), Vector::Zero(l.b.size())});
        }
        return out;
    };
    g.pi = zero_trunk(shape.pi);
    g.vf = zero_trunk(shape.vf);
    g.log_std = Vector::Zero(shape.log_std.size());
    return g;
}

bool PolicyParams::finite() const {
    auto ok = [](const std::vector<LinearLayer>& trunk) {
        for (const LinearLayer& l : trunk) {
            if (!l.w.allFinite() || !l.b.allFinite()) return false;
        }
        return true;
    };
    return ok(pi) && ok(vf) && log_std.allFinite();
}

size_t PolicyParams::flat_size() const {
    size_t n = static_cast<size_t>(log_std.size());
    for (const auto* trunk : {&pi, &vf}) {
        for (const LinearLayer& l : *trunk) n += l.w.size() + l.b.size();
    }
    return n;
}

Vector PolicyParams::flatten() const {
    Vector out(flat_size());
    Eigen::Index at = 0;
    for (const auto* trunk : {&pi, &vf}) {
        for (const LinearLayer& l : *trunk) {
            for (Eigen::Index r = 0; r < l.w.rows(); ++r) {
                for (Eigen::Index c = 0; c < l.w.cols(); ++c) out(at++) = l.w(r, c);
            }
            out.segment(at, l.b.size()) = l.b;
            at += l.b.size();
        }
    }
    out.segment(at, log_std.size()) = log_std;
    return out;
}

void PolicyParams::unflatten(const Vector& flat) {
    if (static_cast<size_t>(flat.size()) != flat_size()) {
        throw error("parameter vector size mismatch");
    }
    Eigen::Index at = 0;
    for (auto* trunk : {&pi, &vf}) {
        for (LinearLayer& l : *trunk) {
            for (Eigen::Index r = 0; r < l.w.rows(); ++r) {
                for (Eigen::Index c = 0; c < l.w.cols(); ++c) l.w(r, c) = flat(at++);
            }
            l.b = flat.segment(at, l.b.size());
            at += l.b.size();
        }
    }
    log_std = flat.segment(at, log_std.size());
}

NetOutput forward(const PolicyParams& p, const Vector& obs) {
    Vector h = obs;
    for (size_t i = 0; i + 1 < p.pi.size(); ++i) {
        h = (p.pi[i].w * h + p.pi[i].b).array().tanh();
    }
    NetOutput out;
    out.mean = p.pi.back().w * h + p.pi.back().b;

    Vector hv = obs;
    for (size_t i = 0; i + 1 < p.vf.size(); ++i) {
        hv = (p.vf[i].w * hv + p.vf[i].b).array().tanh();
    }
    out.value = (p.vf.back().w * hv + p.vf.back().b)(0);
    return out;
}

ForwardTrace forward_batch(const PolicyParams& p, const Matrix& obs) {
    ForwardTrace tr;
    Matrix h = obs;
    for (size_t i = 0; i + 1 < p.pi.size(); ++i) {
        h = ((p.pi[i].w * h).colwise() + p.pi[i].b).array().tanh();
        tr.pi_h.push_back(h);
    }
    tr.mean = (p.pi.back().w * h).colwise() + p.pi.back().b;

    Matrix hv = obs;
    for (size_t i = 0; i + 1 < p.vf.size(); ++i) {
        hv = ((p.vf[i].w * hv).colwise() + p.vf[i].b).array().tanh();
        tr.vf_h.push_back(hv);
    }
    tr.value = (((p.vf.back().w * hv).colwise() + p.vf.back().b)).row(0);
    return tr;
}

namespace {

// Shared trunk backprop: delta arrives at the head output, grads accumulate.
void backprop_trunk(const std::vector<LinearLayer>& trunk, const std::vector<Matrix>& acts,
                    const Matrix& obs, Matrix delta, std::vector<LinearLayer>& g) {
    for (int i = static_cast<int>(trunk.size()) - 1; i >= 0; --i) {
        const Matrix& input = (i == 0) ? obs : acts[i - 1];
        g[i].w += delta * input.transpose();
        g[i].b += delta.rowwise().sum();
        if (i > 0) {
            delta = (trunk[i].w.transpose() * delta).array() *
                    (1.0 - acts[i - 1].array().square());
        }
    }
}

}  // namespace

void backward_batch(const PolicyParams& p, const Matrix& obs, const ForwardTrace& trace,
                    const Matrix& dmean, const Vector& dvalue, PolicyParams& g) {
    backprop_trunk(p.pi, trace.pi_h, obs, dmean, g.pi);
    backprop_trunk(p.vf, trace.vf_h, obs, dvalue.transpose(), g.vf);
}

Adam::Adam(const PolicyParams& shape, double beta1, double beta2, double eps)
    : m_(Vector::Zero(shape.flat_size())),
      v_(Vector::Zero(shape.flat_size())),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {}

void Adam::step(PolicyParams& p, const PolicyParams& grads, double lr) {
    const Vector g = grads.flatten();
    Vector theta = p.flatten();
    if (g.size() != m_.size() || theta.size() != m_.size()) {
        throw error("optimizer/parameter shape mismatch");
    }
    t_ += 1;
    m_ = beta1_ * m_ + (1.0 - beta1_) * g;
    v_ = beta2_ * v_ + (1.0 - beta2_) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    theta -= (lr / c1) * m_.cwiseQuotient(((v_ / c2).cwiseSqrt().array() + eps_).matrix());
    p.unflatten(theta);
}

}  // namespace asim::rl
