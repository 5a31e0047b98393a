#pragma once

#include <cogtrace/event_model.hpp>
#include <cogtrace/geometry.hpp>

#include <deque>
#include <filesystem>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cogtrace {

/// Pre-action screen state. `image_ref` is a path to a lossless image; inside a
/// trajectory directory it is relative ("screenshots/<sha256>.png").
struct Observation {
    Millis capture_ts = 0;
    std::string image_ref;
    int width = 0;
    int height = 0;
    /// Screen-state tag from replay/simulated sources; lets fixture-backed
    /// element providers answer for the right screen.
    std::optional<std::string> screen_state;

    ScreenSize size() const noexcept { return {width, height}; }

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// Latest-screenshot cache fed by a capture loop.
///
/// By default only the newest frame is kept. A retention horizon can be set so
/// that frames needed by actions still being assembled (a type buffer, a
/// click awaiting its double-click window) survive until those actions are
/// emitted: the cache then keeps every frame at or after the horizon plus the
/// newest frame before it.
///
/// One writer, many readers; every method takes the internal lock.
class ObservationCache {
public:
    explicit ObservationCache(Millis capture_period_ms = 100) : capture_period_ms_(capture_period_ms) {}

    ObservationCache(const ObservationCache& other);
    ObservationCache& operator=(const ObservationCache& other);

    /// Throws Error(stale_observation) when obs.capture_ts regresses.
    void cache_observation(Observation obs);

    /// Newest held observation with capture_ts <= action_ts.
    /// Throws Error(no_observation) when the cache is empty or holds only newer frames.
    Observation observation_before(Millis action_ts) const;

    std::optional<Observation> latest() const;
    void set_retention_horizon(Millis horizon);
    /// Also keep the newest frame at or before `pin`. The recorder pins the
    /// timestamp an idle wait would carry, which is only known to be needed
    /// once the next event arrives.
    void set_pin(std::optional<Millis> pin);
    std::size_t held() const;
    Millis capture_period_ms() const noexcept { return capture_period_ms_; }

private:
    void prune_locked();

    mutable std::mutex mutex_;
    std::deque<Observation> frames_;
    Millis horizon_ = std::numeric_limits<Millis>::max();
    std::optional<Millis> pin_;
    Millis capture_period_ms_;
};

// ============================================================================
// Element information
// ============================================================================

struct ElementInfo {
    std::optional<std::string> name;
    Rect rect;
    std::string source;

    friend bool operator==(const ElementInfo&, const ElementInfo&) = default;
};

/// Coordinate -> (name, bounding rect) lookup standing in for the OS
/// accessibility API.
class ElementProvider {
public:
    virtual ~ElementProvider() = default;

    /// Innermost element containing `point`, or nullopt when nothing is known
    /// there. Throws Error(provider_unavailable) when the backend is gone.
    virtual std::optional<ElementInfo> element_info_at(ScreenPoint point) const = 0;

    /// Called with the observation an action is attached to before lookups for
    /// that action, so replay-backed providers can select the matching screen.
    virtual void sync_to(const Observation& /*obs*/) {}
};

struct RegistryElement {
    std::optional<std::string> name;
    Rect rect;

    friend bool operator==(const RegistryElement&, const RegistryElement&) = default;
};

struct ScreenRegistry {
    std::string id;
    std::vector<RegistryElement> elements;
};

/// Declarative element-registry fixture: named rectangles per screen state.
struct ElementRegistry {
    ScreenSize screen;
    std::vector<ScreenRegistry> screens;

    const ScreenRegistry* find(std::string_view id) const;

    static ElementRegistry load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

/// Index of the smallest-area element containing `point`; identical areas break
/// by registry order.
std::optional<std::size_t> innermost_element(std::span<const RegistryElement> elements, ScreenPoint point);

class MockElementProvider : public ElementProvider {
public:
    explicit MockElementProvider(ElementRegistry registry, std::string source = "mock-registry");

    std::optional<ElementInfo> element_info_at(ScreenPoint point) const override;
    void sync_to(const Observation& obs) override;

    /// Throws Error(not_found) for unknown screen ids.
    void select_screen(std::string_view id);
    const std::string& current_screen() const noexcept { return current_; }

    /// Simulates a lost backend: subsequent lookups throw provider_unavailable.
    void set_available(bool available) noexcept { available_ = available; }

private:
    ElementRegistry registry_;
    std::string source_;
    std::string current_;
    bool available_ = true;
};

/// Provider that knows nothing; every lookup is absent.
class NullElementProvider : public ElementProvider {
public:
    std::optional<ElementInfo> element_info_at(ScreenPoint) const override { return std::nullopt; }
};

}  // namespace cogtrace
