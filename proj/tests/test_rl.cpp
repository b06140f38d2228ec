#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "asim/error.hpp"
#include "asim/io.hpp"
#include "asim/rl/checkpoint.hpp"
#include "asim/rl/gae.hpp"
#include "asim/rl/mlp.hpp"
#include "asim/rl/normalizer.hpp"
#include "asim/rl/ppo.hpp"
#include "asim/rl/train.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace asim;
using namespace asim::rl;
namespace fs = std::filesystem;

namespace {

// Gaussian log-density of `action` under the policy, written independently of
// the engine's vectorized version.
double logp_oracle(const PolicyParams& p, const Vector& obs, const Vector& action) {
    const NetOutput out = forward(p, obs);
    double q = 0.0, logdet = 0.0;
    for (Eigen::Index i = 0; i < action.size(); ++i) {
        const double sd = std::exp(p.log_std(i));
        const double z = (action(i) - out.mean(i)) / sd;
        q += z * z;
        logdet += p.log_std(i);
    }
    return -0.5 * q - logdet - 0.5 * action.size() * std::log(2.0 * M_PI);
}

PolicyParams tiny_net(int obs_dim, int act_dim, uint64_t seed) {
    Rng rng(derive_seed(seed, SeedStream::NetworkInit, 0));
    return PolicyParams::init(obs_dim, act_dim, 4, 1, rng);
}

}  // namespace

// --- schedules ---------------------------------------------------------------

TEST_CASE("linear schedules anneal to zero and clamp there") {
    CHECK(schedule(3e-4, 0, 1000) == doctest::Approx(3e-4));
    CHECK(schedule(3e-4, 500, 1000) == doctest::Approx(1.5e-4));
    CHECK(schedule(3e-4, 1000, 1000) == doctest::Approx(0.0));
    CHECK(schedule(3e-4, 2000, 1000) == doctest::Approx(0.0));
    CHECK(schedule(0.2, 250, 1000) == doctest::Approx(0.15));
}

// --- normalizer ----------------------------------------------------------------

TEST_CASE("running normalizer matches a two-pass mean/variance") {
    const int dim = 5, n = 400;
    Rng rng(derive_seed(31, SeedStream::Fuzz, 0));
    std::vector<Vector> xs;
    for (int i = 0; i < n; ++i) {
        Vector x(dim);
        for (int d = 0; d < dim; ++d) x(d) = rng.normal() * (d + 1) + 3.0 * d;
        xs.push_back(x);
    }

    ObsNormalizer norm(dim);
    for (const auto& x : xs) norm.update(x);
    CHECK(norm.count() == doctest::Approx(n));

    Vector mean = Vector::Zero(dim), var = Vector::Zero(dim);
    for (const auto& x : xs) mean += x;
    mean /= n;
    for (const auto& x : xs) var += (x - mean).cwiseProduct(x - mean);
    var /= n;  // population variance

    for (int d = 0; d < dim; ++d) {
        CHECK(norm.mean()(d) == doctest::Approx(mean(d)).epsilon(1e-10));
        CHECK(norm.variance()(d) == doctest::Approx(var(d)).epsilon(1e-10));
    }

    // apply standardizes and clips to [-5, 5]; stats stay frozen
    const double count_before = norm.count();
    Vector z = norm.apply(xs[0]);
    for (int d = 0; d < dim; ++d) {
        const double want = (xs[0](d) - mean(d)) / std::sqrt(var(d) + 1e-8);
        CHECK(z(d) == doctest::Approx(std::clamp(want, -5.0, 5.0)).epsilon(1e-9));
    }
    Vector extreme = Vector::Constant(dim, 1e9);
    Vector zc = norm.apply(extreme);
    for (int d = 0; d < dim; ++d) CHECK(zc(d) == doctest::Approx(5.0));
    CHECK(norm.count() == count_before);

    // fresh normalizer passes inputs through at unit scale (var ~ 0 + 1e-8)
    ObsNormalizer empty(2);
    CHECK(empty.count() == 0.0);
    CHECK(empty.variance()(0) == 0.0);
}

// --- GAE -----------------------------------------------------------------------

TEST_CASE("lambda = 1 GAE equals brute-force discounted returns minus values") {
    Rng rng(derive_seed(32, SeedStream::Fuzz, 0));
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(200));
        std::vector<double> rewards(n), values(n);
        std::vector<uint8_t> dones(n, 0);
        for (int i = 0; i < n; ++i) {
            rewards[i] = rng.normal();
            values[i] = rng.normal();
            dones[i] = rng.uniform() < 0.07 ? 1 : 0;
        }
        const double bootstrap = rng.normal();
        const double gamma = 0.99;
        const int horizon = 16;

        auto got = compute_gae(rewards, values, dones, bootstrap, gamma, 1.0, horizon);
        std::vector<double> adv, ret;
        oracle::mc_advantages(rewards, values, dones, bootstrap, gamma, horizon, &adv, &ret);

        REQUIRE(got.advantages.size() == static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            CHECK(got.advantages[i] == doctest::Approx(adv[i]).epsilon(1e-9));
            CHECK(got.returns[i] == doctest::Approx(ret[i]).epsilon(1e-9));
            // returns are advantages + values by construction
            CHECK(got.returns[i] ==
                  doctest::Approx(got.advantages[i] + values[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("lambda = 0 GAE reduces to one-step TD errors") {
    std::vector<double> rewards = {1.0, -0.5, 2.0, 0.25};
    std::vector<double> values = {0.3, 0.7, -0.2, 0.5};
    std::vector<uint8_t> dones = {0, 1, 0, 0};
    const double bootstrap = 0.9, gamma = 0.99;

    auto got = compute_gae(rewards, values, dones, bootstrap, gamma, 0.0, 64);
    for (int t = 0; t < 4; ++t) {
        const double v_next = t == 3 ? bootstrap : values[t + 1];
        const double delta = rewards[t] + gamma * v_next * (dones[t] ? 0.0 : 1.0) - values[t];
        CHECK(got.advantages[t] == doctest::Approx(delta).epsilon(1e-12));
    }
}

TEST_CASE("gamma = 0 GAE is reward minus value") {
    std::vector<double> rewards = {1.0, 2.0, 3.0};
    std::vector<double> values = {0.5, 0.5, 0.5};
    std::vector<uint8_t> dones = {0, 0, 0};
    // gamma = 0 kills both the bootstrap and the recursion
    auto got = compute_gae(rewards, values, dones, 10.0, 1e-300, 0.95, 64);
    for (int t = 0; t < 3; ++t) {
        CHECK(got.advantages[t] == doctest::Approx(rewards[t] - values[t]).epsilon(1e-6));
    }
}

TEST_CASE("a done flag stops credit flowing backwards") {
    std::vector<double> rewards = {0.0, 0.0, 100.0};
    std::vector<double> values = {0.0, 0.0, 0.0};
    std::vector<uint8_t> dones = {0, 1, 0};
    auto got = compute_gae(rewards, values, dones, 0.0, 0.99, 0.95, 64);
    // t=0 sees only the step up to the terminal at t=1; the 100 at t=2 is a new episode
    CHECK(got.advantages[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(got.advantages[2] == doctest::Approx(100.0 * 0.99 * 0.0 + 100.0).epsilon(1e-9));
}

TEST_CASE("horizon cuts stop the recursion but keep the TD bootstrap") {
    // two segments of 2 with zero values: the cut at t=1->2 blocks lambda credit
    std::vector<double> rewards = {0.0, 0.0, 0.0, 5.0};
    std::vector<double> values = {0.0, 0.0, 0.0, 0.0};
    std::vector<uint8_t> dones = {0, 0, 0, 0};
    auto cut = compute_gae(rewards, values, dones, 0.0, 1.0, 1.0, 2);
    auto uncut = compute_gae(rewards, values, dones, 0.0, 1.0, 1.0, 64);
    CHECK(uncut.advantages[0] == doctest::Approx(5.0));
    CHECK(cut.advantages[0] == doctest::Approx(0.0));  // credit stops at the cut
    CHECK(cut.advantages[2] == doctest::Approx(5.0));
}

TEST_CASE("GAE rejects mismatched stream lengths") {
    std::vector<double> rewards = {1.0, 2.0};
    std::vector<double> values = {0.0};
    std::vector<uint8_t> dones = {0, 0};
    CHECK_THROWS_AS(compute_gae(rewards, values, dones, 0.0, 0.99, 0.95, 64), asim::error);
}

// --- network forward/backward ---------------------------------------------------

TEST_CASE("forward matches a plain-loop reference network") {
    Rng rng(derive_seed(33, SeedStream::NetworkInit, 0));
    PolicyParams p = PolicyParams::init(6, 2, 8, 2, rng);
    REQUIRE(p.pi.size() == 3);  // 2 hidden + head
    REQUIRE(p.vf.size() == 3);
    CHECK(p.pi[0].w.rows() == 8);
    CHECK(p.pi[0].w.cols() == 6);
    CHECK(p.pi[2].w.rows() == 2);
    CHECK(p.log_std.isZero());

    Rng data(derive_seed(33, SeedStream::Fuzz, 1));
    for (int trial = 0; trial < 10; ++trial) {
        Vector x(6);
        for (int i = 0; i < 6; ++i) x(i) = data.normal();

        auto run_trunk = [&](const std::vector<LinearLayer>& trunk) {
            Vector h = x;
            for (size_t li = 0; li + 1 < trunk.size(); ++li) {
                Vector pre = trunk[li].w * h + trunk[li].b;
                for (Eigen::Index k = 0; k < pre.size(); ++k) pre(k) = std::tanh(pre(k));
                h = pre;
            }
            return Vector(trunk.back().w * h + trunk.back().b);
        };
        const Vector want_mean = run_trunk(p.pi);
        const double want_value = run_trunk(p.vf)(0);

        const NetOutput out = forward(p, x);
        CHECK((out.mean - want_mean).norm() < 1e-12);
        CHECK(out.value == doctest::Approx(want_value).epsilon(1e-12));
    }
}

TEST_CASE("forward_batch equals per-sample forward") {
    Rng rng(derive_seed(34, SeedStream::NetworkInit, 0));
    PolicyParams p = PolicyParams::init(5, 2, 7, 2, rng);
    Rng data(derive_seed(34, SeedStream::Fuzz, 0));
    Matrix obs(5, 9);
    for (int j = 0; j < 9; ++j)
        for (int i = 0; i < 5; ++i) obs(i, j) = data.normal();

    const ForwardTrace tr = forward_batch(p, obs);
    REQUIRE(tr.mean.cols() == 9);
    for (int j = 0; j < 9; ++j) {
        const NetOutput out = forward(p, obs.col(j));
        CHECK((tr.mean.col(j) - out.mean).norm() < 1e-12);
        CHECK(tr.value(j) == doctest::Approx(out.value).epsilon(1e-12));
    }
}

TEST_CASE("flatten/unflatten round-trips every parameter") {
    PolicyParams p = tiny_net(3, 2, 35);
    const Vector flat = p.flatten();
    CHECK(flat.size() == static_cast<Eigen::Index>(p.flat_size()));

    PolicyParams q = PolicyParams::zeros_like(p);
    q.unflatten(flat);
    CHECK((q.flatten() - flat).norm() == 0.0);
    CHECK((q.pi[0].w - p.pi[0].w).norm() == 0.0);
    CHECK((q.log_std - p.log_std).norm() == 0.0);
}

TEST_CASE("ppo_loss gradients match central finite differences") {
    const int obs_dim = 3, act_dim = 2, n = 6;
    PolicyParams p = tiny_net(obs_dim, act_dim, 36);
    // make log_std non-trivial so its gradient path is exercised
    p.log_std(0) = -0.3;
    p.log_std(1) = 0.2;

    Rng data(derive_seed(36, SeedStream::Fuzz, 0));
    Matrix obs(obs_dim, n), actions(act_dim, n);
    Vector adv(n), ret(n), logp_old(n), values_old(n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < obs_dim; ++i) obs(i, j) = data.normal();
        for (int i = 0; i < act_dim; ++i) actions(i, j) = data.normal() * 0.5;
        adv(j) = data.normal();
        ret(j) = data.normal() * 0.3;
    }
    // ratio = 1 and value delta = 0: strictly inside both clip regions, so the
    // loss is smooth where the finite differences probe it
    for (int j = 0; j < n; ++j) {
        logp_old(j) = logp_oracle(p, obs.col(j), actions.col(j));
        values_old(j) = forward(p, obs.col(j)).value;
    }
    const double clip_eps = 0.2, beta = 0.01;

    PolicyParams analytic = PolicyParams::zeros_like(p);
    ppo_loss(p, obs, actions, logp_old, adv, ret, values_old, clip_eps, beta, &analytic);
    const Vector g = analytic.flatten();

    const Vector theta = p.flatten();
    const double h = 1e-6;
    int checked = 0;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
        Vector tp = theta, tm = theta;
        tp(k) += h;
        tm(k) -= h;
        PolicyParams pp = PolicyParams::zeros_like(p), pm = PolicyParams::zeros_like(p);
        pp.unflatten(tp);
        pm.unflatten(tm);
        const double fp =
            ppo_loss(pp, obs, actions, logp_old, adv, ret, values_old, clip_eps, beta, nullptr)
                .total;
        const double fm =
            ppo_loss(pm, obs, actions, logp_old, adv, ret, values_old, clip_eps, beta, nullptr)
                .total;
        const double fd = (fp - fm) / (2.0 * h);
        const double scale = std::max({std::abs(fd), std::abs(g(k)), 1e-4});
        INFO("param ", k, " fd=", fd, " analytic=", g(k));
        CHECK(std::abs(fd - g(k)) / scale < 1e-4);
        ++checked;
    }
    CHECK(checked == static_cast<int>(p.flat_size()));
}

TEST_CASE("ppo_loss clips hostile ratios out of the gradient") {
    const int obs_dim = 2, act_dim = 1, n = 1;
    PolicyParams p = tiny_net(obs_dim, act_dim, 37);
    Matrix obs = Matrix::Zero(obs_dim, n);
    Matrix act = Matrix::Zero(act_dim, n);
    act(0, 0) = forward(p, obs.col(0)).mean(0);  // logp is at its maximum

    Vector adv(1), ret(1), values_old(1), logp_old(1);
    adv(0) = 1.0;
    ret(0) = forward(p, obs.col(0)).value;  // keep the value term quiet
    values_old(0) = ret(0);
    // old logp much lower than current: ratio far above 1 + eps
    logp_old(0) = logp_oracle(p, obs.col(0), act.col(0)) - 1.0;

    PolicyParams g = PolicyParams::zeros_like(p);
    const LossTerms terms = ppo_loss(p, obs, act, logp_old, adv, ret, values_old, 0.2, 0.0, &g);
    // surrogate value is the clipped branch
    CHECK(terms.policy == doctest::Approx(-(1.0 + 0.2) * adv(0)));
    // positive advantage + ratio above the ceiling: no policy gradient at all
    for (const auto& l : g.pi) {
        CHECK(l.w.norm() == 0.0);
        CHECK(l.b.norm() == 0.0);
    }
    CHECK(g.log_std.norm() == 0.0);  // beta = 0 and the sample is clipped
}

TEST_CASE("entropy depends only on log_std") {
    PolicyParams p = tiny_net(4, 2, 38);
    Matrix obs = Matrix::Random(4, 3);
    Matrix act = Matrix::Random(2, 3);
    Vector zeros = Vector::Zero(3);
    Vector logp_old(3);
    for (int j = 0; j < 3; ++j) logp_old(j) = logp_oracle(p, obs.col(j), act.col(j));

    const LossTerms t1 =
        ppo_loss(p, obs, act, logp_old, zeros, zeros, zeros, 0.2, 0.01, nullptr);
    const double expect = p.log_std.sum() + 0.5 * 2 * (1.0 + std::log(2.0 * M_PI));
    CHECK(t1.entropy == doctest::Approx(expect).epsilon(1e-12));
    CHECK(t1.total ==
          doctest::Approx(t1.policy + 0.5 * t1.value - 0.01 * t1.entropy).epsilon(1e-12));
}

TEST_CASE("Adam matches a hand-rolled reference over several steps") {
    PolicyParams p = tiny_net(3, 2, 39);
    PolicyParams q = p;  // same start for the reference

    Adam adam(p);
    Vector m = Vector::Zero(static_cast<Eigen::Index>(p.flat_size()));
    Vector v = m;

    Rng rng(derive_seed(39, SeedStream::Fuzz, 0));
    const double lr = 1e-3, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    for (int t = 1; t <= 5; ++t) {
        PolicyParams grads = PolicyParams::zeros_like(p);
        Vector gflat(static_cast<Eigen::Index>(p.flat_size()));
        for (Eigen::Index i = 0; i < gflat.size(); ++i) gflat(i) = rng.normal();
        grads.unflatten(gflat);

        adam.step(p, grads, lr);

        Vector theta = q.flatten();
        m = b1 * m + (1.0 - b1) * gflat;
        v = b2 * v + (1.0 - b2) * gflat.cwiseProduct(gflat);
        const double bc1 = 1.0 - std::pow(b1, t);
        const double bc2 = 1.0 - std::pow(b2, t);
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            theta(i) -= lr * (m(i) / bc1) / (std::sqrt(v(i) / bc2) + eps);
        }
        q.unflatten(theta);

        CHECK((p.flatten() - q.flatten()).lpNorm<Eigen::Infinity>() < 1e-12);
    }
    CHECK(adam.t() == 5);
}

TEST_CASE("ppo_update normalizes advantages and applies scheduled coefficients") {
    PpoConfig cfg;
    cfg.buffer_size = 8;
    cfg.batch_size = 4;
    cfg.num_epoch = 2;
    cfg.max_steps = 1000;
    cfg.hidden_units = 4;
    cfg.num_layers = 1;

    const int obs_dim = 3, act_dim = 2;
    PolicyParams p = tiny_net(obs_dim, act_dim, 40);
    Adam opt(p);

    Rng data(derive_seed(40, SeedStream::Fuzz, 0));
    RolloutBuffer buf;
    buf.obs = Matrix(obs_dim, 8);
    buf.actions = Matrix(act_dim, 8);
    buf.logp = Vector(8);
    buf.advantages = Vector(8);
    buf.returns = Vector(8);
    buf.values = Vector(8);
    for (int j = 0; j < 8; ++j) {
        for (int i = 0; i < obs_dim; ++i) buf.obs(i, j) = data.normal();
        for (int i = 0; i < act_dim; ++i) buf.actions(i, j) = data.normal() * 0.3;
        buf.logp(j) = logp_oracle(p, buf.obs.col(j), buf.actions.col(j));
        buf.advantages(j) = data.normal() * 2.0 + 1.0;
        buf.returns(j) = data.normal();
        buf.values(j) = forward(p, buf.obs.col(j)).value;
    }

    const Vector before = p.flatten();
    Rng shuffle(derive_seed(40, SeedStream::PpoShuffle, 0));
    UpdateStats stats = ppo_update(p, opt, buf, cfg, 500, shuffle);

    // advantages were standardized in place with the population std
    CHECK(buf.advantages.mean() == doctest::Approx(0.0).epsilon(1e-9));
    const double var = (buf.advantages.array() - buf.advantages.mean()).square().mean();
    CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-6));

    // schedules evaluated at the given global step (half of max_steps)
    CHECK(stats.lr == doctest::Approx(cfg.learning_rate * 0.5));
    CHECK(stats.beta == doctest::Approx(cfg.beta * 0.5));
    CHECK(stats.epsilon == doctest::Approx(cfg.epsilon * 0.5));

    // 2 epochs x 2 minibatches of 4
    CHECK(opt.t() == 4);
    CHECK((p.flatten() - before).norm() > 0.0);
    CHECK(p.finite());

    // a partial buffer is rejected
    RolloutBuffer small = buf;
    small.logp = Vector(4);
    CHECK_THROWS_AS(ppo_update(p, opt, small, cfg, 0, shuffle), asim::error);
}

// --- checkpoints -----------------------------------------------------------------

TEST_CASE("checkpoints round-trip bit-exactly and reject corruption") {
    const fs::path dir = fs::temp_directory_path() / "asim_ckpt_test";
    fs::create_directories(dir);
    const std::string path = (dir / "net.bin").string();

    PolicyParams p = tiny_net(5, 2, 41);
    p.log_std(0) = -0.123456789;
    ObsNormalizer norm(5);
    Rng rng(derive_seed(41, SeedStream::Fuzz, 0));
    for (int i = 0; i < 10; ++i) {
        Vector x(5);
        for (int d = 0; d < 5; ++d) x(d) = rng.normal();
        norm.update(x);
    }

    save_checkpoint({p, norm, 123456, 0xdeadbeefULL}, path);
    const Checkpoint back = load_checkpoint(path);
    CHECK(back.step == 123456);
    CHECK(back.cfg_hash == 0xdeadbeefULL);
    CHECK((back.params.flatten() - p.flatten()).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((back.normalizer.mean() - norm.mean()).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((back.normalizer.m2() - norm.m2()).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(back.normalizer.count() == norm.count());

    // truncation
    std::string bytes = read_text_file(path);
    write_text_file((dir / "trunc.bin").string(), bytes.substr(0, bytes.size() - 16));
    CHECK_THROWS_AS(load_checkpoint((dir / "trunc.bin").string()), asim::error);

    // magic corruption
    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    write_text_file((dir / "magic.bin").string(), bad_magic);
    CHECK_THROWS_AS(load_checkpoint((dir / "magic.bin").string()), asim::error);

    // version bump
    std::string bad_version = bytes;
    bad_version[8] = static_cast<char>(99);
    write_text_file((dir / "version.bin").string(), bad_version);
    CHECK_THROWS_AS(load_checkpoint((dir / "version.bin").string()), asim::error);

    // missing file
    CHECK_THROWS_AS(load_checkpoint((dir / "nope.bin").string()), asim::error);
    fs::remove_all(dir);
}

// --- end-to-end trainer ---------------------------------------------------------

namespace {

TrainOptions quick_train_options(uint64_t seed) {
    TrainOptions opt;
    opt.ppo.max_steps = 256;
    opt.ppo.buffer_size = 128;
    opt.ppo.batch_size = 32;
    opt.ppo.time_horizon = 16;
    opt.ppo.summary_frequency = 128;
    opt.ppo.hidden_units = 8;
    opt.ppo.num_layers = 1;
    opt.env.occupant_count = 2;
    opt.env.max_episode_steps = 50;
    opt.n_envs = 4;
    opt.seed = seed;
    return opt;
}

}  // namespace

TEST_CASE("a short training run is deterministic and writes its artifacts") {
    const BuildingLayout& l = testsup::box_room();
    const fs::path dir_a = fs::temp_directory_path() / "asim_train_a";
    const fs::path dir_b = fs::temp_directory_path() / "asim_train_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);

    TrainOptions opt = quick_train_options(77);
    opt.out_dir = dir_a.string();
    TrainResult ra = train(l, opt);
    opt.out_dir = dir_b.string();
    TrainResult rb = train(l, opt);

    CHECK(ra.steps_collected == 256);
    // every env finishes its 50-step capped episode once within 64 local steps
    CHECK(ra.episode_rewards.size() == 4);
    CHECK(ra.episode_lengths == std::vector<int>{50, 50, 50, 50});
    CHECK(ra.summaries.size() == 2);
    CHECK(ra.summaries[0].step == 128);
    CHECK(ra.summaries[1].step == 256);
    // schedules reported at their pre-update values
    CHECK(ra.summaries[1].lr <= opt.ppo.learning_rate);

    // byte-identical training logs for identical configs and seeds
    const std::string log_a = read_text_file(ra.log_path);
    const std::string log_b = read_text_file(rb.log_path);
    CHECK(log_a == log_b);
    CHECK(log_a.substr(0, log_a.find('\n')) == summary_header());

    // identical final parameters, elementwise
    CHECK((ra.params.flatten() - rb.params.flatten()).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(ra.episode_rewards == rb.episode_rewards);

    // rotating checkpoints: 128, 256, final
    CHECK(ra.checkpoint_paths.size() == 3);
    for (const auto& cp : ra.checkpoint_paths) CHECK(fs::exists(cp));
    const Checkpoint final_ckpt = load_checkpoint(ra.checkpoint_paths.back());
    CHECK(final_ckpt.step == 256);
    CHECK((final_ckpt.params.flatten() - ra.params.flatten()).lpNorm<Eigen::Infinity>() ==
          0.0);

    // a different seed diverges
    TrainOptions opt2 = quick_train_options(78);
    TrainResult rc = train(l, opt2);
    CHECK((rc.params.flatten() - ra.params.flatten()).lpNorm<Eigen::Infinity>() > 0.0);

    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("train validates its configuration") {
    const BuildingLayout& l = testsup::box_room();
    TrainOptions opt = quick_train_options(1);
    opt.n_envs = 3;  // 128 % 3 != 0
    CHECK_THROWS_AS(train(l, opt), validation_error);

    TrainOptions opt2 = quick_train_options(1);
    opt2.ppo.buffer_size = 100;  // not divisible by batch_size 32
    CHECK_THROWS_AS(train(l, opt2), validation_error);
}
