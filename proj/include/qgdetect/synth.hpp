#pragma once

#include "qgdetect/config.hpp"
#include "qgdetect/signal_io.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qgd {

// Deterministic waveform building blocks; a channel is the sum of a base
// level, an optional piecewise-linear ramp, an optional periodic component
// and Gaussian noise.
struct RampSpec {
    double start = 0.0;
    double rate1 = 0.0;          // per sample, before the changeover
    double rate2 = 0.0;          // per sample, after it
    std::size_t changeover = 0;  // sample index where the slope switches
};

struct PeriodicSpec {
    enum class Wave { Triangle, Sine };
    Wave wave = Wave::Triangle;
    double amplitude = 1.0;
    std::size_t period = 2;
    double phase = 0.0; // in periods, [0, 1)
};

struct ChannelSpec {
    std::string name;
    double base = 0.0;
    std::optional<RampSpec> ramp;
    std::optional<PeriodicSpec> periodic;
    double noise_sigma = 0.0;
};

struct SynthSpec {
    std::size_t length = 0;
    std::vector<ChannelSpec> channels;
    std::uint64_t seed = 0;
};

RawSeries generate_normal(const SynthSpec& spec);

// Additive rectangular steps. height is a fraction of the target channel's
// observed value range at injection time. Placement is uniform under the
// constraint that consecutive steps (and the series edges) keep at least
// min_gap clean samples between them; the injected windows are appended to
// the series' anomaly intervals.
struct AnomalyPlan {
    std::size_t count = 0;
    std::size_t duration = 100;
    double height = 0.3;
    std::size_t min_gap = 0;
};

RawSeries inject_steps(const RawSeries& series, const AnomalyPlan& plan,
                       std::size_t target_channel, std::uint64_t seed);

// Train/test pair from one continuous generation: the head stays clean,
// steps go into the tail only.
struct CorpusSpec {
    SynthSpec base;
    std::size_t train_length = 0;
    AnomalyPlan plan;
    std::size_t target_channel = 0;
};

struct Corpus {
    RawSeries train;
    RawSeries test;
};

Corpus generate_corpus(const CorpusSpec& spec);

// Three-channel default shape driven by the [synth] config section: a noisy
// triangle target, a phase-shifted copy, and a two-slope ramp.
CorpusSpec corpus_from_config(const ConfigFile& cfg);

} // namespace qgd
