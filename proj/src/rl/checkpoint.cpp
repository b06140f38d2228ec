#include "asim/rl/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include "asim/error.hpp"

namespace asim::rl {

namespace {

constexpr char kMagic[8] = {'A', 'S', 'I', 'M', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary), path_(path) {
        if (!out_) throw error("cannot write checkpoint: " + path);
    }
    void u32(uint32_t v) { raw(&v, sizeof v); }
    void u64(uint64_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }
    void f64s(const double* p, size_t n) { raw(p, n * sizeof(double)); }
    void bytes(const char* p, size_t n) { raw(p, n); }
    void finish() {
        out_.flush();
        if (!out_) throw error("checkpoint write failed: " + path_);
    }

private:
    void raw(const void* p, size_t n) { out_.write(static_cast<const char*>(p), n); }
    std::ofstream out_;
    std::string path_;
};

class Reader {
public:
    explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw error("cannot open checkpoint: " + path);
    }
    uint32_t u32() { uint32_t v; raw(&v, sizeof v); return v; }
    uint64_t u64() { uint64_t v; raw(&v, sizeof v); return v; }
    double f64() { double v; raw(&v, sizeof v); return v; }
    void f64s(double* p, size_t n) { raw(p, n * sizeof(double)); }
    void raw(void* p, size_t n) {
        in_.read(static_cast<char*>(p), n);
        if (static_cast<size_t>(in_.gcount()) != n) {
            throw error("corrupt checkpoint (truncated): " + path_);
        }
    }

private:
    std::ifstream in_;
    std::string path_;
};

void write_trunk(Writer& w, const std::vector<LinearLayer>& trunk) {
    for (const LinearLayer& l : trunk) {
        w.u32(static_cast<uint32_t>(l.w.rows()));
        w.u32(static_cast<uint32_t>(l.w.cols()));
        for (Eigen::Index r = 0; r < l.w.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.w.cols(); ++c) w.f64(l.w(r, c));
        }
        w.f64s(l.b.data(), l.b.size());
    }
}

void read_trunk(Reader& rd, std::vector<LinearLayer>& trunk, size_t count,
                const std::string& path) {
    trunk.resize(count);
    for (LinearLayer& l : trunk) {
        const uint32_t rows = rd.u32();
        const uint32_t cols = rd.u32();
        if (rows == 0 || cols == 0 || rows > 1'000'000 || cols > 1'000'000) {
            throw error("corrupt checkpoint (bad layer shape): " + path);
        }
        l.w = Matrix(rows, cols);
        for (uint32_t r = 0; r < rows; ++r) {
            for (uint32_t c = 0; c < cols; ++c) l.w(r, c) = rd.f64();
        }
        l.b = Vector(rows);
        rd.f64s(l.b.data(), rows);
    }
}

}  // namespace

void save_checkpoint(const Checkpoint& c, const std::string& path) {
    Writer w(path);
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kVersion);
    w.u32(static_cast<uint32_t>(c.params.obs_dim()));
    w.u32(static_cast<uint32_t>(c.params.act_dim()));
    w.u32(static_cast<uint32_t>(c.params.pi.front().w.rows()));
    w.u32(static_cast<uint32_t>(c.params.hidden_layers()));
    w.u64(c.step);
    w.u64(c.cfg_hash);
    w.f64(c.normalizer.count());
    w.f64s(c.normalizer.mean().data(), c.normalizer.mean().size());
    w.f64s(c.normalizer.m2().data(), c.normalizer.m2().size());
    w.f64s(c.params.log_std.data(), c.params.log_std.size());
    write_trunk(w, c.params.pi);
    write_trunk(w, c.params.vf);
    w.finish();
}

Checkpoint load_checkpoint(const std::string& path) {
    Reader rd(path);
    char magic[8];
    rd.raw(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw error("corrupt checkpoint (bad magic): " + path);
    }
    const uint32_t version = rd.u32();
    if (version != kVersion) {
        throw error("checkpoint version mismatch: " + path + " has version " +
                    std::to_string(version) + ", expected " + std::to_string(kVersion));
    }
    const uint32_t obs_dim = rd.u32();
    const uint32_t act_dim = rd.u32();
    const uint32_t hidden = rd.u32();
    const uint32_t layers = rd.u32();
    if (obs_dim == 0 || act_dim == 0 || hidden == 0 || layers == 0) {
        throw error("corrupt checkpoint (bad dimensions): " + path);
    }
    (void)hidden;

    Checkpoint c;
    c.step = rd.u64();
    c.cfg_hash = rd.u64();
    const double count = rd.f64();
    Vector mean(obs_dim), m2(obs_dim);
    rd.f64s(mean.data(), obs_dim);
    rd.f64s(m2.data(), obs_dim);
    c.normalizer = ObsNormalizer(std::move(mean), std::move(m2), count);
    c.params.log_std = Vector(act_dim);
    rd.f64s(c.params.log_std.data(), act_dim);
    read_trunk(rd, c.params.pi, layers + 1, path);
    read_trunk(rd, c.params.vf, layers + 1, path);
    if (c.params.obs_dim() != static_cast<int>(obs_dim) ||
        c.params.act_dim() != static_cast<int>(act_dim)) {
        throw error("corrupt checkpoint (dimension header disagrees with layers): " + path);
    }
    return c;
}

}  // namespace asim::rl
