#include <cogtrace/action_dsl.hpp>

#include <benchmark/benchmark.h>

using namespace cogtrace;

namespace {

const std::vector<AgentAction>& sample_actions() {
    static const std::vector<AgentAction> actions = {
        AgentAction::click("the search box at the top of the page"),
        AgentAction::double_click("the 'Budget.xlsx' file icon"),
        AgentAction::drag({100, 200}, {640, 480}),
        AgentAction::scroll_by(0, -5),
        AgentAction::hotkey("ctrl", "s"),
        AgentAction::type_text("Eiffel Tower opening hours, tickets: \"adult\" <student>"),
        AgentAction::press_key("enter"),
        AgentAction::finish(),
    };
    return actions;
}

}  // namespace

static void BM_render_agent_action(benchmark::State& state) {
    for (auto _ : state) {
        for (const auto& a : sample_actions()) {
            auto line = render_agent_action(a);
            benchmark::DoNotOptimize(line);
        }
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(sample_actions().size()));
}
BENCHMARK(BM_render_agent_action);

static void BM_parse_agent_action(benchmark::State& state) {
    std::vector<std::string> lines;
    for (const auto& a : sample_actions()) lines.push_back(render_agent_action(a));
    for (auto _ : state) {
        for (const auto& l : lines) {
            auto a = parse_agent_action(l);
            benchmark::DoNotOptimize(a);
        }
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(lines.size()));
}
BENCHMARK(BM_parse_agent_action);
