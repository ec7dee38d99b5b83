#include "dkappa/frames.hpp"

namespace dkappa {

ExerciseSpec exercise_spec(Exercise exercise) {
    if (exercise == Exercise::Exp1) return {Exercise::Exp1, 5, {"A", "B", "C", "D"}};
    return {Exercise::Exp2, 6, {"A", "B", "C", "D", "E"}};
}

// Published per-area sizes, entered verbatim. The per-stratum values are the
// ground truth; printed column totals are never used.
DesignFrame exp1_frame() {
    return DesignFrame({
        {"1", 6758, 631},
        {"2", 15029, 1412},
        {"3", 10127, 927},
        {"4", 5083, 458},
        {"5", 14043, 1310},
        {"6", 21191, 1984},
        {"7", 6284, 532},
        {"8a", 2460, 225},
        {"9", 12349, 1130},
        {"13", 5681, 590},
    });
}

DesignFrame exp2_frame() {
    return DesignFrame({
        {"1", 4631, 467},
        {"2", 10182, 1018},
        {"3", 6625, 662},
        {"4", 3953, 394},
        {"5", 10423, 1037},
        {"6", 15400, 1524},
        {"7", 6354, 638},
        {"8b", 2370, 237},
        {"9", 9930, 890},
        {"11b", 1801, 180},
        {"13", 5490, 512},
    });
}

MissingCounts exp2_missing_counts() {
    return MissingCounts({467, 1018, 662, 394, 1037, 1524, 638, 237, 890, 180, 512},
                         {23, 10, 9, 6, 86, 231, 8, 3, 108, 5, 14});
}

}  // namespace dkappa
