#pragma once

#include <string>
#include <vector>

#include "dkappa/design.hpp"
#include "dkappa/missingness.hpp"
#include "dkappa/weights.hpp"

namespace dkappa {

// Rating alphabet of an assessment exercise. `categories` includes the
// sentinel; `labels` lists the definite categories best-first.
struct ExerciseSpec {
    Exercise exercise = Exercise::Exp1;
    int categories = 5;
    std::vector<std::string> labels;
};

ExerciseSpec exercise_spec(Exercise exercise);

// Published per-area population and sample sizes, verbatim.
DesignFrame exp1_frame();
DesignFrame exp2_frame();

// Published per-area sample sizes and missing-article counts for the second
// exercise, verbatim.
MissingCounts exp2_missing_counts();

}  // namespace dkappa
