#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <variant>
#include <vector>

#include "fhn/errors.hpp"

namespace fhn {

// Deterministic input current generators I1(t). Feedback couples the
// population to its own delayed supra-threshold fraction n(t - delta_T).
struct DriveSpec;

struct ConstantDrive {
  double amplitude = 0;
};

struct PeriodicDrive {
  double amplitude = 0;
  double frequency = 1;  // I1 = A cos(2 pi f t)
};

struct FeedbackDrive {
  double gain = 0;     // I1 = gain * n(t - delay)
  double delay = 0;
};

struct SumDrive {
  std::vector<DriveSpec> terms;
};

struct DriveSpec {
  std::variant<ConstantDrive, PeriodicDrive, FeedbackDrive, SumDrive> node;

  static DriveSpec constant(double amplitude) {
    return {ConstantDrive{amplitude}};
  }
  static DriveSpec periodic(double amplitude, double frequency) {
    return {PeriodicDrive{amplitude, frequency}};
  }
  static DriveSpec feedback(double gain, double delay) {
    return {FeedbackDrive{gain, delay}};
  }
  static DriveSpec sum(std::vector<DriveSpec> terms) {
    return {SumDrive{std::move(terms)}};
  }
};

void validate(const DriveSpec& spec);
bool has_feedback(const DriveSpec& spec);

// First periodic term in the tree, if any; the scenario layer uses its
// frequency as the SNR target.
std::optional<PeriodicDrive> first_periodic(const DriveSpec& spec);
std::optional<FeedbackDrive> first_feedback(const DriveSpec& spec);

// Ring buffer holding the n(t) history at dt resolution. capacity =
// round(delay/dt); reads before the first wrap-around return the fill value.
// A value pushed at step k is read (peeked) again exactly at step k +
// capacity when reads and pushes alternate read-first each step.
class DelayBuffer {
 public:
  DelayBuffer(double delay, double dt, double fill_value) {
    if (!(dt > 0)) throw ConfigError("DelayBuffer: dt must be > 0");
    if (delay < 0) throw ConfigError("DelayBuffer: delay must be >= 0");
    const double steps = delay / dt;
    if (std::abs(steps - std::round(steps)) > 1e-9)
      throw ConfigError("DelayBuffer: delay must be a multiple of dt");
    ring_.assign(static_cast<std::size_t>(std::llround(steps)), fill_value);
    latest_ = fill_value;
  }

  std::size_t capacity() const { return ring_.size(); }

  // Oldest stored sample; with capacity 0 the latest push.
  double peek() const { return ring_.empty() ? latest_ : ring_[head_]; }

  // Evict the oldest sample and append n_now.
  void push(double n_now) {
    if (n_now < -1e-9 || n_now > 1 + 1e-9)
      throw RangeError("DelayBuffer: pushed fraction outside [0,1]");
    latest_ = n_now;
    if (ring_.empty()) return;
    ring_[head_] = n_now;
    head_ = (head_ + 1) % ring_.size();
  }

  // Combined read-then-push used by simulation loops: returns the sample
  // delayed by exactly capacity steps (n_now itself when capacity is 0).
  double exchange(double n_now) {
    if (ring_.empty()) {
      push(n_now);
      return n_now;
    }
    const double delayed = ring_[head_];
    push(n_now);
    return delayed;
  }

 private:
  std::vector<double> ring_;
  std::size_t head_ = 0;
  double latest_ = 0;
};

namespace detail {

template <typename Visitor>
void visit_drive(const DriveSpec& spec, Visitor&& visitor) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, SumDrive>) {
          for (const auto& term : node.terms)
            visit_drive(term, visitor);
        } else {
          visitor(node);
        }
      },
      spec.node);
}

}  // namespace detail

inline void validate(const DriveSpec& spec) {
  std::visit(
      [](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, PeriodicDrive>) {
          if (!(node.frequency > 0))
            throw ConfigError("periodic drive requires f > 0");
        } else if constexpr (std::is_same_v<T, FeedbackDrive>) {
          if (node.delay < 0)
            throw ConfigError("feedback drive requires delta_T >= 0");
        } else if constexpr (std::is_same_v<T, SumDrive>) {
          if (node.terms.empty())
            throw ConfigError("drive sum must not be empty");
          for (const auto& term : node.terms) validate(term);
        }
      },
      spec.node);
}

inline bool has_feedback(const DriveSpec& spec) {
  bool found = false;
  detail::visit_drive(spec, [&](const auto& node) {
    if constexpr (std::is_same_v<std::decay_t<decltype(node)>, FeedbackDrive>)
      found = true;
  });
  return found;
}

inline std::optional<PeriodicDrive> first_periodic(const DriveSpec& spec) {
  std::optional<PeriodicDrive> out;
  detail::visit_drive(spec, [&](const auto& node) {
    if constexpr (std::is_same_v<std::decay_t<decltype(node)>, PeriodicDrive>)
      if (!out) out = node;
  });
  return out;
}

inline std::optional<FeedbackDrive> first_feedback(const DriveSpec& spec) {
  std::optional<FeedbackDrive> out;
  detail::visit_drive(spec, [&](const auto& node) {
    if constexpr (std::is_same_v<std::decay_t<decltype(node)>, FeedbackDrive>)
      if (!out) out = node;
  });
  return out;
}

// Evaluate I1(t). Feedback terms read the delayed fraction from the buffer;
// evaluating a feedback term without one is an error. All feedback terms in a
// sum share the single buffer.
inline double current(const DriveSpec& spec, double t,
                      const DelayBuffer* buffer = nullptr) {
  return std::visit(
      [&](const auto& node) -> double {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ConstantDrive>) {
          return node.amplitude;
        } else if constexpr (std::is_same_v<T, PeriodicDrive>) {
          return node.amplitude *
                 std::cos(2.0 * std::numbers::pi * node.frequency * t);
        } else if constexpr (std::is_same_v<T, FeedbackDrive>) {
          if (buffer == nullptr)
            throw MissingBuffer("feedback drive evaluated without a buffer");
          return node.gain * buffer->peek();
        } else {
          double acc = 0;
          for (const auto& term : node.terms) acc += current(term, t, buffer);
          return acc;
        }
      },
      spec.node);
}

// Same evaluation with the delayed sample already read (the simulation loop
// obtains it via DelayBuffer::exchange).
inline double current_with_delayed(const DriveSpec& spec, double t,
                                   double delayed_n) {
  return std::visit(
      [&](const auto& node) -> double {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ConstantDrive>) {
          return node.amplitude;
        } else if constexpr (std::is_same_v<T, PeriodicDrive>) {
          return node.amplitude *
                 std::cos(2.0 * std::numbers::pi * node.frequency * t);
        } else if constexpr (std::is_same_v<T, FeedbackDrive>) {
          return node.gain * delayed_n;
        } else {
          double acc = 0;
          for (const auto& term : node.terms)
            acc += current_with_delayed(term, t, delayed_n);
          return acc;
        }
      },
      spec.node);
}

}  // namespace fhn
