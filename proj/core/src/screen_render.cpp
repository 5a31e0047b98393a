#include <cogtrace/screen_render.hpp>

#include <algorithm>

namespace cogtrace {

namespace {

// Muted palette, picked by nesting depth so nested boxes stay distinguishable.
constexpr Rgb kFills[] = {{236, 239, 244}, {216, 222, 233}, {229, 233, 240}, {200, 208, 220}};

int depth_of(const ScreenRegistry& screen, std::size_t index) {
    const Rect& r = screen.elements[index].rect;
    int depth = 0;
    for (std::size_t j = 0; j < screen.elements.size(); ++j) {
        if (j == index) continue;
        const Rect& o = screen.elements[j].rect;
        const bool encloses = o.left <= r.left && o.top <= r.top && o.right >= r.right && o.bottom >= r.bottom;
        if (encloses && (o != r || j < index)) ++depth;
    }
    return depth;
}

}  // namespace

Image render_registry_screen(ScreenSize size, const ScreenRegistry& screen,
                             const std::map<std::string, std::string>& element_text) {
    Image img(size.width, size.height, Rgb{248, 248, 248});
    std::vector<std::size_t> order(screen.elements.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<int> depth(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) depth[i] = depth_of(screen, i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return depth[a] < depth[b]; });

    for (std::size_t i : order) {
        const auto& e = screen.elements[i];
        fill_rect(img, e.rect, kFills[depth[i] % 4]);
        stroke_rect(img, e.rect, Rgb{90, 98, 112}, 1);
        if (e.name && e.rect.height() >= 14) {
            draw_label(img, {e.rect.left + 4, e.rect.top + std::min(16, e.rect.height() - 2)}, *e.name, Rgb{40, 44, 52}, 0.4);
        }
        if (e.name) {
            if (auto it = element_text.find(*e.name); it != element_text.end() && !it->second.empty()) {
                draw_label(img, {e.rect.left + 8, e.rect.bottom - 6}, it->second, Rgb{0, 0, 160}, 0.5);
            }
        }
    }
    return img;
}

}  // namespace cogtrace
