#include <cogtrace/encapsulator.hpp>
#include <cogtrace/observer.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace cogtrace;

namespace {

std::vector<RawInputEvent> typing_stream(std::size_t n) {
    std::mt19937 rng(1);
    std::uniform_int_distribution<int> letter(0, 25), gap(20, 180);
    std::vector<RawInputEvent> out;
    Millis ts = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ts += gap(rng);
        if (i % 17 == 16) out.push_back(RawInputEvent::key_down(ts, "backspace"));
        else out.push_back(RawInputEvent::key_down(ts, std::string(1, static_cast<char>('a' + letter(rng)))));
    }
    return out;
}

std::vector<RawInputEvent> click_stream(std::size_t pairs) {
    std::mt19937 rng(2);
    std::uniform_int_distribution<int> x(0, 1919), y(0, 1079), gap(50, 900);
    std::vector<RawInputEvent> out;
    Millis ts = 0;
    for (std::size_t i = 0; i < pairs; ++i) {
        ts += gap(rng);
        const ScreenPoint p{x(rng), y(rng)};
        out.push_back(RawInputEvent::mouse_down(ts, p));
        out.push_back(RawInputEvent::mouse_move(ts + 20, {p.x + 1, p.y}));
        out.push_back(RawInputEvent::mouse_up(ts + 60, i % 4 == 0 ? ScreenPoint{p.x + 200, p.y} : p));
        ts += 60;
    }
    return out;
}

}  // namespace

static void BM_encapsulate_typing(benchmark::State& state) {
    const auto events = typing_stream(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto out = encapsulate(events);
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(events.size()));
}
BENCHMARK(BM_encapsulate_typing)->Arg(200)->Arg(10000);

static void BM_encapsulate_clicks(benchmark::State& state) {
    const auto events = click_stream(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto out = encapsulate(events);
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(events.size()));
}
BENCHMARK(BM_encapsulate_clicks)->Arg(100)->Arg(5000);

static void BM_observation_before(benchmark::State& state) {
    ObservationCache cache;
    cache.set_retention_horizon(0);
    for (Millis t = 0; t < state.range(0) * 100; t += 100) {
        cache.cache_observation(Observation{t, "frame", 1920, 1080, std::nullopt});
    }
    Millis probe = 0;
    for (auto _ : state) {
        auto obs = cache.observation_before(probe);
        benchmark::DoNotOptimize(obs);
        probe = (probe + 37) % (state.range(0) * 100);
    }
}
BENCHMARK(BM_observation_before)->Arg(16)->Arg(256);
