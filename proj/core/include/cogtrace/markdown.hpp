#pragma once

#include <cogtrace/trajectory.hpp>

#include <string>

namespace cogtrace {

/// Human-readable review document: task header, then one section per step
/// with its tracker action line and a link to the (marked, when available)
/// screenshot. Links are relative to the trajectory directory.
std::string export_markdown(const Trajectory& trajectory);

}  // namespace cogtrace
