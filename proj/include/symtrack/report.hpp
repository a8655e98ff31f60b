#pragma once

#include <optional>
#include <string>
#include <vector>

namespace symtrack {

enum class Verdict {
    ctp_by_z,        // configuration tracking property, symmetric-product family route
    sctp_by_track_z, // strong configuration tracking property
    ctp_by_k,        // configuration tracking property, cone route
    inconclusive
};

const char* to_string(Verdict v);

struct LevelRecord {
    int level = 0;
    int span_dim = 0;
    int lie_dim = 0;
    bool condition3 = false; // <Z:Z> stays in the level's span, per member
};

struct ConeLevelRecord {
    int level = 0;
    int ray_count = 0;
    int lineality_dim = 0;
    bool is_subspace = false; // sampling-based; see samples
    int samples = 0;
};

struct AnalysisReport {
    std::string analyzer; // "z" or "k"
    Verdict verdict = Verdict::inconclusive;
    std::optional<int> witness_level;
    bool drift_in_span = false;
    std::vector<LevelRecord> levels;
    std::vector<ConeLevelRecord> cone_levels; // analyzer == "k" only

    bool positive() const { return verdict != Verdict::inconclusive; }
};

} // namespace symtrack
