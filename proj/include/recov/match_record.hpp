#pragma once

#include <optional>
#include <vector>

#include "recov/events.hpp"
#include "recov/spadl.hpp"

namespace recov {

// One normalized match: SPADL actions oriented left-to-right for their
// acting team, aligned score contexts, and aligned freeze frames in the
// same orientation and internal units.
struct MatchRecord {
    MatchMeta meta;
    std::vector<spadl::SpadlAction> actions;
    std::vector<spadl::GameContext> contexts;
    std::vector<std::optional<FreezeFrame>> frames;

    int other_team(int team_id) const {
        if (meta.home_team_id != 0 && meta.away_team_id != 0)
            return team_id == meta.home_team_id ? meta.away_team_id : meta.home_team_id;
        for (const auto& a : actions)
            if (a.team_id != team_id) return a.team_id;
        return 0;
    }
};

}  // namespace recov
