#include <cogtrace/errors.hpp>
#include <cogtrace/observer.hpp>
#include <cogtrace/serialization.hpp>

#include <fstream>

namespace cogtrace {

ObservationCache::ObservationCache(const ObservationCache& other) {
    std::lock_guard lock(other.mutex_);
    frames_ = other.frames_;
    horizon_ = other.horizon_;
    pin_ = other.pin_;
    capture_period_ms_ = other.capture_period_ms_;
}

ObservationCache& ObservationCache::operator=(const ObservationCache& other) {
    if (this == &other) return *this;
    std::scoped_lock lock(mutex_, other.mutex_);
    frames_ = other.frames_;
    horizon_ = other.horizon_;
    pin_ = other.pin_;
    capture_period_ms_ = other.capture_period_ms_;
    return *this;
}

void ObservationCache::cache_observation(Observation obs) {
    std::lock_guard lock(mutex_);
    if (!frames_.empty() && obs.capture_ts < frames_.back().capture_ts) {
        throw Error(ErrorCode::stale_observation,
                    "observation at " + std::to_string(obs.capture_ts) + " ms is older than cached frame at " +
                        std::to_string(frames_.back().capture_ts) + " ms");
    }
    frames_.push_back(std::move(obs));
    prune_locked();
}

Observation ObservationCache::observation_before(Millis action_ts) const {
    std::lock_guard lock(mutex_);
    if (frames_.empty()) throw Error(ErrorCode::no_observation, "observation cache is empty; capture source not started");
    for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) {
        if (it->capture_ts <= action_ts) return *it;
    }
    throw Error(ErrorCode::no_observation,
                "no cached observation at or before " + std::to_string(action_ts) + " ms");
}

std::optional<Observation> ObservationCache::latest() const {
    std::lock_guard lock(mutex_);
    if (frames_.empty()) return std::nullopt;
    return frames_.back();
}

void ObservationCache::set_retention_horizon(Millis horizon) {
    std::lock_guard lock(mutex_);
    horizon_ = horizon;
    prune_locked();
}

void ObservationCache::set_pin(std::optional<Millis> pin) {
    std::lock_guard lock(mutex_);
    pin_ = pin;
    prune_locked();
}

std::size_t ObservationCache::held() const {
    std::lock_guard lock(mutex_);
    return frames_.size();
}

void ObservationCache::prune_locked() {
    // Keep every frame after the horizon, the newest frame at or before it and
    // the newest frame at or before the pin. The newest frame overall is
    // always in the first two groups.
    auto newest_at_or_before = [&](Millis ts) -> std::ptrdiff_t {
        std::ptrdiff_t found = -1;
        for (std::size_t i = 0; i < frames_.size() && frames_[i].capture_ts <= ts; ++i) found = static_cast<std::ptrdiff_t>(i);
        return found;
    };
    const std::ptrdiff_t at_horizon = newest_at_or_before(horizon_);
    const std::ptrdiff_t at_pin = pin_ ? newest_at_or_before(*pin_) : -1;
    std::deque<Observation> kept;
    for (std::size_t i = 0; i < frames_.size(); ++i) {
        const auto idx = static_cast<std::ptrdiff_t>(i);
        if (frames_[i].capture_ts > horizon_ || idx == at_horizon || idx == at_pin) kept.push_back(std::move(frames_[i]));
    }
    frames_ = std::move(kept);
}

// ============================================================================
// Element registry
// ============================================================================

const ScreenRegistry* ElementRegistry::find(std::string_view id) const {
    for (const auto& s : screens) {
        if (s.id == id) return &s;
    }
    return nullptr;
}

ElementRegistry ElementRegistry::load(const std::filesystem::path& path) {
    return read_json_file(path).get<ElementRegistry>();
}

void ElementRegistry::save(const std::filesystem::path& path) const { write_json_file(path, *this); }

std::optional<std::size_t> innermost_element(std::span<const RegistryElement> elements, ScreenPoint point) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < elements.size(); ++i) {
        const Rect& r = elements[i].rect;
        if (!r.contains(point)) continue;
        if (!best || r.area() < elements[*best].rect.area()) best = i;
    }
    return best;
}

MockElementProvider::MockElementProvider(ElementRegistry registry, std::string source)
    : registry_(std::move(registry)), source_(std::move(source)) {
    if (!registry_.screens.empty()) current_ = registry_.screens.front().id;
}

std::optional<ElementInfo> MockElementProvider::element_info_at(ScreenPoint point) const {
    if (!available_) throw Error(ErrorCode::provider_unavailable, "element provider backend unavailable");
    const ScreenRegistry* screen = registry_.find(current_);
    if (screen == nullptr) return std::nullopt;
    const auto index = innermost_element(screen->elements, point);
    if (!index) return std::nullopt;
    const RegistryElement& e = screen->elements[*index];
    return ElementInfo{e.name, e.rect, source_};
}

void MockElementProvider::sync_to(const Observation& obs) {
    if (obs.screen_state && registry_.find(*obs.screen_state) != nullptr) current_ = *obs.screen_state;
}

void MockElementProvider::select_screen(std::string_view id) {
    if (registry_.find(id) == nullptr) throw Error(ErrorCode::not_found, "unknown screen state '" + std::string(id) + "'");
    current_ = std::string(id);
}

}  // namespace cogtrace
