#include "hdrv/radiometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "hdrv/errors.hpp"

namespace hdrv {

ExposureSpec ExposureSpec::from_ev(int ev, double reference_time, double gamma) {
    if (reference_time <= 0.0)
        throw std::invalid_argument("ExposureSpec: reference time must be positive");
    if (gamma <= 0.0)
        throw std::invalid_argument("ExposureSpec: gamma must be positive");
    return ExposureSpec{ev, reference_time * std::exp2(static_cast<double>(ev)), gamma};
}

InputFrame InputFrame::make(Image ldr, const ExposureSpec& spec) {
    Image linear = ldr_to_linear(ldr, spec);
    return InputFrame{std::move(ldr), std::move(linear), spec};
}

Image ldr_to_linear(const Image& img, const ExposureSpec& spec) {
    if (spec.time_s <= 0.0)
        throw std::invalid_argument("ldr_to_linear: exposure time must be positive");
    Image out(img.height, img.width, img.channels, Domain::LinearHdr);
    const double g = spec.gamma;
    const double t = spec.time_s;
    for (size_t i = 0; i < img.data.size(); ++i)
        out.data[i] = static_cast<float>(std::pow(static_cast<double>(img.data[i]), g) / t);
    return out;
}

Image linear_to_ldr(const Image& img, const ExposureSpec& spec, int bits) {
    if (bits != 0 && bits != 8 && bits != 16)
        throw std::invalid_argument("linear_to_ldr: bits must be 8, 16, or 0 (no quantization)");
    Image out(img.height, img.width, img.channels, Domain::LdrDisplay);
    const double inv_g = 1.0 / spec.gamma;
    const double t = spec.time_s;
    const double levels = bits ? static_cast<double>((1 << bits) - 1) : 0.0;
    for (size_t i = 0; i < img.data.size(); ++i) {
        double v = std::pow(static_cast<double>(img.data[i]) * t, inv_g);
        v = std::clamp(v, 0.0, 1.0);
        if (bits) v = std::round(v * levels) / levels;
        out.data[i] = static_cast<float>(v);
    }
    return out;
}

double mu_tonemap_value(double h, double mu) {
    return std::log(1.0 + mu * h) / std::log(1.0 + mu);
}

Image mu_tonemap(const Image& img, double mu) {
    constexpr double kSlack = 1e-6;
    Image out(img.height, img.width, img.channels, img.domain);
    const double denom = std::log(1.0 + mu);
    for (size_t i = 0; i < img.data.size(); ++i) {
        const double h = img.data[i];
        if (h < -kSlack || h > 1.0 + kSlack)
            throw std::domain_error("mu_tonemap: input " + std::to_string(h) +
                                    " outside [0,1]; normalize before tonemapping");
        out.data[i] = static_cast<float>(std::log(1.0 + mu * std::clamp(h, 0.0, 1.0)) / denom);
    }
    return out;
}

double mu_l1_loss(const Image& estimate, const Image& truth, double mu) {
    if (!estimate.same_shape(truth))
        throw std::invalid_argument("mu_l1_loss: shape mismatch");
    const Image a = mu_tonemap(estimate, mu);
    const Image b = mu_tonemap(truth, mu);
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i)
        acc += std::abs(static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]));
    return acc / static_cast<double>(a.data.size());
}

namespace {

inline double hat_weight(double z) { return std::max(0.0, 1.0 - std::abs(2.0 * z - 1.0)); }

} // namespace

Image merge_stack_to_hdr(const MultiExposureStack& stack) {
    if (stack.shots.size() < 2)
        throw std::invalid_argument("merge_stack_to_hdr: need at least 2 shots");
    const Image& first = stack.shots.front().second;
    for (size_t j = 1; j < stack.shots.size(); ++j) {
        if (!stack.shots[j].second.same_shape(first))
            throw std::invalid_argument("merge_stack_to_hdr: shot " + std::to_string(j) +
                                        " has mismatched dimensions");
        if (stack.shots[j].first.ev <= stack.shots[j - 1].first.ev)
            throw std::invalid_argument("merge_stack_to_hdr: EVs must be strictly increasing");
    }

    // shots are EV-sorted: front() is the shortest exposure, back() the longest
    const auto& shortest = stack.shots.front();
    const auto& longest = stack.shots.back();
    Image out(first.height, first.width, first.channels, Domain::LinearHdr);
    const size_t n = out.data.size();
    for (size_t i = 0; i < n; ++i) {
        double num = 0.0, den = 0.0;
        for (const auto& [spec, img] : stack.shots) {
            const double z = img.data[i];
            const double w = hat_weight(z);
            num += w * std::pow(z, spec.gamma) / spec.time_s;
            den += w;
        }
        if (den > 1e-12) {
            out.data[i] = static_cast<float>(num / den);
        } else if (shortest.second.data[i] >= 0.5f) {
            // bright-clipped everywhere: the shortest exposure saturates last
            out.data[i] = static_cast<float>(
                std::pow(static_cast<double>(shortest.second.data[i]), shortest.first.gamma) /
                shortest.first.time_s);
        } else {
            out.data[i] = static_cast<float>(
                std::pow(static_cast<double>(longest.second.data[i]), longest.first.gamma) /
                longest.first.time_s);
        }
    }
    return out;
}

AlternatingSequence make_alternating_sequence(const std::vector<MultiExposureStack>& stacks,
                                              const std::vector<int>& pattern) {
    if (pattern.size() < 2)
        throw std::invalid_argument("make_alternating_sequence: pattern length must be >= 2");
    for (size_t k = 0; k < pattern.size(); ++k)
        if (pattern[k] == pattern[(k + 1) % pattern.size()])
            throw std::invalid_argument(
                "make_alternating_sequence: pattern places equal EVs adjacently");

    AlternatingSequence seq;
    seq.pattern = pattern;
    seq.frames.reserve(stacks.size());
    for (size_t i = 0; i < stacks.size(); ++i) {
        const int want = pattern[i % pattern.size()];
        const auto it = std::find_if(stacks[i].shots.begin(), stacks[i].shots.end(),
                                     [&](const auto& s) { return s.first.ev == want; });
        if (it == stacks[i].shots.end())
            throw std::invalid_argument("make_alternating_sequence: frame " + std::to_string(i) +
                                        " has no shot at EV " + std::to_string(want));
        seq.frames.emplace_back(it->second, it->first);
    }
    return seq;
}

MultiExposureStack simulate_exposure_stack(const Image& hdr, const std::vector<int>& evs,
                                           int bits, double noise_sigma, uint64_t seed,
                                           double gamma) {
    for (size_t k = 1; k < evs.size(); ++k)
        if (evs[k] <= evs[k - 1])
            throw std::invalid_argument("simulate_exposure_stack: EVs must be strictly increasing");

    // Box-Muller on a fixed-width engine keeps stacks reproducible across
    // standard library implementations.
    std::mt19937_64 rng(seed);
    auto gauss = [&rng]() {
        const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
        const double u2 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
    };

    MultiExposureStack stack;
    const double levels = bits ? static_cast<double>((1 << bits) - 1) : 0.0;
    for (const int ev : evs) {
        const ExposureSpec spec = ExposureSpec::from_ev(ev, 1.0, gamma);
        Image shot = linear_to_ldr(hdr, spec, 0);
        if (noise_sigma > 0.0)
            for (float& v : shot.data)
                v = static_cast<float>(std::clamp(v + noise_sigma * gauss(), 0.0, 1.0));
        if (bits)
            for (float& v : shot.data)
                v = static_cast<float>(std::round(static_cast<double>(v) * levels) / levels);
        stack.shots.emplace_back(spec, std::move(shot));
    }
    return stack;
}

} // namespace hdrv
