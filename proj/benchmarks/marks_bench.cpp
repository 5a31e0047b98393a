#include <cogtrace/image.hpp>
#include <cogtrace/marks.hpp>

#include <benchmark/benchmark.h>

using namespace cogtrace;

static void BM_draw_click_marks(benchmark::State& state) {
    const Image base(1920, 1080, Rgb{240, 240, 240});
    const auto marks = click_marks({1920, 1080}, {960, 540}, Rect{900, 500, 1020, 580});
    for (auto _ : state) {
        auto img = draw_click_marks(base, marks);
        benchmark::DoNotOptimize(img);
    }
}
BENCHMARK(BM_draw_click_marks)->Unit(benchmark::kMillisecond);

static void BM_encode_png(benchmark::State& state) {
    const Image base(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)) * 9 / 16, Rgb{30, 90, 200});
    for (auto _ : state) {
        auto bytes = encode_png(base);
        benchmark::DoNotOptimize(bytes);
    }
}
BENCHMARK(BM_encode_png)->Arg(320)->Arg(1920)->Unit(benchmark::kMillisecond);
