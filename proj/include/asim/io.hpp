#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace asim {

// --- Deterministic randomness ---------------------------------------------
//
// All randomness in a run flows from one 64-bit master seed. Streams are
// derived with splitmix64 over (master, stream tag, index), so per-env,
// per-run, and per-episode generators never overlap and every run is
// replayable from the manifest seed alone.

uint64_t splitmix64(uint64_t& state);

enum class SeedStream : uint64_t {
    ShooterSpawn = 1,
    Occupants = 2,
    PolicySampling = 3,
    NetworkInit = 4,
    PpoShuffle = 5,
    Scenario = 6,
    Fuzz = 7,
};

uint64_t derive_seed(uint64_t master, SeedStream stream, uint64_t index);

// Small self-contained generator (xoshiro-free: splitmix64 core). Kept local so
// runs reproduce byte-for-byte independent of the standard library's
// distribution implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() { return splitmix64(state_); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    uint64_t below(uint64_t n) { return next_u64() % n; }

    // Standard normal via Marsaglia polar; the second variate is kept for the
    // next call so consumption stays one-draw-per-value.
    double normal();

private:
    uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// --- Hashing ----------------------------------------------------------------

uint64_t fnv1a64(std::string_view data);
uint64_t fnv1a64_file(const std::string& path);  // throws asim::error when unreadable
std::string hex64(uint64_t v);

// --- Formatting helpers -------------------------------------------------------

// Fixed-precision decimal; used for every number written to run outputs so
// identical runs produce byte-identical files.
std::string format_double(double v, int precision);
std::string iso8601_now_utc();

std::string read_text_file(const std::string& path);   // throws when missing
void write_text_file(const std::string& path, const std::string& content);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace asim
