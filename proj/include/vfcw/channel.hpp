#pragma once

// Uplink channel: range gating, Bernoulli loss, and per-packet latency.

#include <charconv>
#include <cmath>
#include <istream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "vfcw/collision.hpp"
#include "vfcw/error.hpp"
#include "vfcw/geometry.hpp"
#include "vfcw/random.hpp"
#include "vfcw/stable.hpp"

namespace vfcw::channel {

struct StatusPacket {
    VehicleId vehicle_id;
    double sensed_time = 0.0; ///< seconds
    Vec2 location;
    Vec2 velocity;
    Vec2 acceleration;
    double heading = 0.0;

    bool valid() const noexcept {
        return std::isfinite(sensed_time) && sensed_time >= 0.0 && finite(location) && finite(velocity) &&
               finite(acceleration) && std::isfinite(heading);
    }
};

enum class Outcome { delivered, lost, out_of_range };

inline std::string_view to_string(Outcome o) {
    switch (o) {
    case Outcome::delivered: return "delivered";
    case Outcome::lost: return "lost";
    case Outcome::out_of_range: return "out_of_range";
    }
    return "?";
}

struct Delivery {
    StatusPacket packet;
    Outcome outcome = Outcome::lost;
    double arrival_time = 0.0; ///< seconds; meaningful only when delivered
    double latency_ms = 0.0;
};

struct StableLatency {
    stable::StableParams params;
};

struct TraceLatency {
    std::vector<double> samples_ms;
    bool wrap = true; ///< false: running past the end throws
};

struct FixedLatency {
    double ms = 0.0;
};

using LatencyModel = std::variant<StableLatency, TraceLatency, FixedLatency>;

struct ChannelConfig {
    LatencyModel latency = StableLatency{};
    double loss_rate = 0.0;
    double comm_range = 500.0;

    void validate() const {
        if (!(loss_rate >= 0.0 && loss_rate <= 1.0)) throw ConfigError("loss_rate must lie in [0, 1]");
        if (!(comm_range > 0.0)) throw ConfigError("comm_range must be positive");
        if (const auto* s = std::get_if<StableLatency>(&latency)) {
            if (!s->params.valid()) throw ConfigError("invalid stable latency parameters");
        } else if (const auto* t = std::get_if<TraceLatency>(&latency)) {
            if (t->samples_ms.empty()) throw ConfigError("latency trace is empty");
            for (double v : t->samples_ms) {
                if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("latency trace values must be non-negative");
            }
        } else if (const auto* f = std::get_if<FixedLatency>(&latency)) {
            if (!(f->ms >= 0.0) || !std::isfinite(f->ms)) throw ConfigError("fixed latency must be non-negative");
        }
    }
};

/// Fitted DSRC shape. The location is set so the mean latency is 77 ms.
inline constexpr stable::StableParams kFogDsrcParams{1.77395, 1.0, 77.0, 13.3685};
/// Same shape shifted to a 120 ms mean.
inline constexpr stable::StableParams kCloudLteParams{1.77395, 1.0, 120.0, 13.3685};

inline ChannelConfig preset(std::string_view name) {
    ChannelConfig c;
    if (name == "fog_dsrc") {
        c.latency = StableLatency{kFogDsrcParams};
    } else if (name == "cloud_lte") {
        c.latency = StableLatency{kCloudLteParams};
    } else {
        throw ConfigError("unknown channel preset '" + std::string(name) + "'");
    }
    return c;
}

inline constexpr int kMaxRedraws = 10000;

/// A stable draw conditioned on being non-negative (rejection sampling).
template <class Engine>
double sample_nonnegative(const stable::StableParams& p, Engine& rng) {
    for (int i = 0; i < kMaxRedraws; ++i) {
        const double x = stable::sample(p, rng);
        if (x >= 0.0) return x;
    }
    throw ConfigError("stable latency model almost never yields non-negative values");
}

/// One latency value per line, milliseconds. Blank lines and `#` comments are skipped.
inline std::vector<double> load_latency_trace(std::istream& in) {
    std::vector<double> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#') continue;
        const auto e = line.find_last_not_of(" \t\r");
        std::string_view tok(line.data() + b, e - b + 1);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
            throw ParseError(lineno, "not a number: '" + std::string(tok) + "'");
        }
        if (v < 0.0) throw ParseError(lineno, "negative latency");
        out.push_back(v);
    }
    return out;
}

class Channel {
public:
    explicit Channel(ChannelConfig config) : config_(std::move(config)) { config_.validate(); }

    const ChannelConfig& config() const noexcept { return config_; }

    /// Range is decided first and consumes no randomness. In range, exactly one
    /// uniform is drawn for loss, then latency is drawn only on success.
    template <class Engine>
    Delivery transmit(const StatusPacket& packet, Vec2 sender, Vec2 fog, Engine& rng) {
        Delivery d;
        d.packet = packet;
        if (distance(sender, fog) > config_.comm_range) {
            d.outcome = Outcome::out_of_range;
            return d;
        }
        const double u = uniform_open01(rng);
        if (u < config_.loss_rate) {
            d.outcome = Outcome::lost;
            return d;
        }
        d.outcome = Outcome::delivered;
        d.latency_ms = draw_latency(rng);
        d.arrival_time = packet.sensed_time + d.latency_ms / 1000.0;
        return d;
    }

    template <class Engine>
    double draw_latency(Engine& rng) {
        return std::visit(
            [&](auto& m) -> double {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, StableLatency>) {
                    return sample_nonnegative(m.params, rng);
                } else if constexpr (std::is_same_v<M, TraceLatency>) {
                    if (cursor_ >= m.samples_ms.size()) {
                        if (!m.wrap) throw ConfigError("latency trace exhausted in strict replay mode");
                        cursor_ = 0;
                    }
                    return m.samples_ms[cursor_++];
                } else {
                    return m.ms;
                }
            },
            config_.latency);
    }

private:
    ChannelConfig config_;
    std::size_t cursor_ = 0;
};

} // namespace vfcw::channel
