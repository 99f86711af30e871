#pragma once

#include <string>
#include <utility>
#include <vector>

#include "psynth/ingest.hpp"
#include "psynth/schema.hpp"

namespace psynth {

struct PlotPanel {
    std::string title;
    GroupedDistribution synth;
};

/// SVG line chart of response shares per group category. The first subplot shows the
/// benchmark alone; every further subplot shows one panel's synthetic lines in color
/// over the benchmark lines in grey. Layout is fixed (4 subplots per row, 340 x 260 px
/// each) and the output carries no timestamps, so equal inputs give equal bytes.
std::string render_comparison_svg(const AttributeSchema& schema, const Question& question,
                                  const GroupedDistribution& real,
                                  const std::vector<PlotPanel>& panels);

} // namespace psynth
