#pragma once

#include <cogtrace/image.hpp>
#include <cogtrace/observer.hpp>

#include <map>
#include <string>

namespace cogtrace {

/// Wireframe rendering of a registry screen: light background, one outlined
/// box per element with its name, and optional text content drawn inside the
/// named elements. Deterministic, so fixture screenshots can be regenerated
/// instead of checked in.
Image render_registry_screen(ScreenSize size, const ScreenRegistry& screen,
                             const std::map<std::string, std::string>& element_text = {});

}  // namespace cogtrace
