#include "qgdetect/synth.hpp"
#include "qgdetect/errors.hpp"
#include "qgdetect/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qgd {

namespace {

double periodic_value(const PeriodicSpec& p, std::size_t t) {
    const double pos =
        std::fmod(static_cast<double>(t) / static_cast<double>(p.period) + p.phase, 1.0);
    if (p.wave == PeriodicSpec::Wave::Sine)
        return p.amplitude * std::sin(6.283185307179586476925287 * pos);
    // triangle through [-1, 1], peak at pos = 0.5
    return p.amplitude * (4.0 * (pos < 0.5 ? pos : 1.0 - pos) - 1.0);
}

} // namespace

RawSeries generate_normal(const SynthSpec& spec) {
    if (spec.length == 0) throw std::invalid_argument("generate_normal: zero length");
    if (spec.channels.empty())
        throw std::invalid_argument("generate_normal: no channels");
    for (const ChannelSpec& ch : spec.channels) {
        if (ch.periodic && ch.periodic->period < 2)
            throw std::invalid_argument("generate_normal: period must be >= 2");
        if (ch.noise_sigma < 0.0)
            throw std::invalid_argument("generate_normal: negative noise");
    }

    RawSeries s;
    s.name = "synthetic";
    for (std::size_t c = 0; c < spec.channels.size(); ++c) {
        const ChannelSpec& ch = spec.channels[c];
        s.channel_names.push_back(ch.name.empty() ? "ch" + std::to_string(c) : ch.name);
        std::vector<double> v(spec.length);
        rng::engine g(rng::derive(spec.seed, 500 + c));
        for (std::size_t t = 0; t < spec.length; ++t) {
            double x = ch.base;
            if (ch.ramp) {
                const RampSpec& r = *ch.ramp;
                if (t < r.changeover) {
                    x += r.start + r.rate1 * static_cast<double>(t);
                } else {
                    x += r.start + r.rate1 * static_cast<double>(r.changeover) +
                         r.rate2 * static_cast<double>(t - r.changeover);
                }
            }
            if (ch.periodic) x += periodic_value(*ch.periodic, t);
            if (ch.noise_sigma > 0.0) x += ch.noise_sigma * rng::normal(g);
            v[t] = x;
        }
        s.channels.push_back(std::move(v));
    }
    s.validate();
    return s;
}

RawSeries inject_steps(const RawSeries& series, const AnomalyPlan& plan,
                       std::size_t target_channel, std::uint64_t seed) {
    series.validate();
    if (target_channel >= series.channels.size())
        throw std::invalid_argument("inject_steps: target channel out of range");
    if (plan.count == 0) return series;
    if (plan.duration == 0)
        throw std::invalid_argument("inject_steps: zero duration");

    const std::size_t len = series.length();
    const std::size_t occupied =
        plan.count * plan.duration + (plan.count + 1) * plan.min_gap;
    if (occupied > len)
        throw std::invalid_argument("inject_steps: plan does not fit in the series");
    const std::size_t slack = len - occupied;

    // Sorted uniform draws share the slack among the steps; fixed spacing
    // keeps min_gap on both sides of every step.
    rng::engine g(rng::derive(seed, 900));
    std::vector<double> u(plan.count);
    for (double& x : u) x = rng::uniform01(g);
    std::sort(u.begin(), u.end());

    RawSeries out = series;
    auto& chan = out.channels[target_channel];
    const auto [mn, mx] = std::minmax_element(chan.begin(), chan.end());
    const double step = plan.height * (*mx - *mn);

    for (std::size_t i = 0; i < plan.count; ++i) {
        const std::size_t extra =
            static_cast<std::size_t>(u[i] * static_cast<double>(slack));
        const std::size_t begin =
            plan.min_gap + extra + i * (plan.duration + plan.min_gap);
        const std::size_t end = begin + plan.duration;
        for (std::size_t t = begin; t < end; ++t) chan[t] += step;
        out.anomaly_intervals.push_back({begin, end});
    }
    std::sort(out.anomaly_intervals.begin(), out.anomaly_intervals.end(),
              [](const Interval& a, const Interval& b) { return a.begin < b.begin; });
    out.validate();
    return out;
}

Corpus generate_corpus(const CorpusSpec& spec) {
    if (spec.train_length == 0 || spec.train_length >= spec.base.length)
        throw invalid_split_error("generate_corpus: train_length must split the series");
    RawSeries whole = generate_normal(spec.base);
    auto [train, test] = split_series(whole, spec.train_length);
    train.name = "train";
    test.name = "test";
    Corpus c;
    c.train = std::move(train);
    c.test = inject_steps(test, spec.plan, spec.target_channel, spec.base.seed);
    return c;
}

CorpusSpec corpus_from_config(const ConfigFile& cfg) {
    static constexpr std::string_view allowed[] = {
        "length",  "train_length", "seed",     "period", "amplitude",
        "base",    "noise",        "anomalies", "duration", "height",
        "min_gap",
    };
    cfg.check_known_keys("synth", allowed);

    const std::size_t length =
        static_cast<std::size_t>(cfg.get_int_or("synth", "length", 700000));
    const std::size_t train_length =
        static_cast<std::size_t>(cfg.get_int_or("synth", "train_length", 500000));
    const std::size_t period =
        static_cast<std::size_t>(cfg.get_int_or("synth", "period", 96));
    const double amplitude = cfg.get_double_or("synth", "amplitude", 0.3);
    const double base = cfg.get_double_or("synth", "base", 0.35);
    const double noise = cfg.get_double_or("synth", "noise", 0.0015);

    CorpusSpec spec;
    spec.base.length = length;
    spec.base.seed = cfg.get_u64_or("synth", "seed", 7);
    spec.train_length = train_length;
    spec.target_channel = 0;

    ChannelSpec target;
    target.name = "v0";
    target.base = base;
    target.periodic = PeriodicSpec{PeriodicSpec::Wave::Triangle, amplitude, period, 0.0};
    target.noise_sigma = noise;

    ChannelSpec shifted = target;
    shifted.name = "v1";
    shifted.periodic->phase = 0.25;

    // Slow two-slope ramp, think of a drive signal sweeping up fast and
    // recovering slowly.
    ChannelSpec ramp;
    ramp.name = "i0";
    ramp.base = 0.0;
    RampSpec r;
    r.start = 0.1;
    r.changeover = length / 6;
    r.rate1 = 2.5 / static_cast<double>(length);
    r.rate2 = 0.5 / static_cast<double>(length);
    ramp.ramp = r;
    ramp.noise_sigma = noise;

    spec.base.channels = {target, shifted, ramp};

    spec.plan.count = static_cast<std::size_t>(cfg.get_int_or("synth", "anomalies", 200));
    spec.plan.duration = static_cast<std::size_t>(cfg.get_int_or("synth", "duration", 100));
    spec.plan.height = cfg.get_double_or("synth", "height", 0.3);
    spec.plan.min_gap =
        static_cast<std::size_t>(cfg.get_int_or("synth", "min_gap", 256));
    return spec;
}

} // namespace qgd
