#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "larvasim/errors.hpp"

namespace larvasim {

/// Discrete interventions along a run. Sampling removes larvae and their wet
/// mass impulsively; door events hold the door signal over an interval; feed
/// and water additions are impulsive mass additions to the medium.
struct Event {
    enum class Kind { sample, door, add_feed, add_water };
    Kind kind = Kind::sample;
    double time_s = 0.0;
    double count = 0.0;       // sample: larvae removed
    double duration_s = 0.0;  // door: open interval length
    double mass_kg = 0.0;     // add_feed / add_water
};

struct EventSchedule {
    std::vector<Event> events;

    bool empty() const { return events.empty(); }

    std::vector<Event> sorted() const {
        std::vector<Event> s = events;
        std::stable_sort(s.begin(), s.end(),
                         [](const Event& a, const Event& b) { return a.time_s < b.time_s; });
        return s;
    }

    void validate(double t0, double tf) const {
        for (const auto& e : events) {
            if (e.time_s < t0 || e.time_s > tf)
                throw ConfigError("event outside the simulation horizon");
            if (e.kind == Event::Kind::sample && e.count <= 0.0)
                throw ConfigError("sampling event must remove a positive count");
            if (e.kind == Event::Kind::door && e.duration_s <= 0.0)
                throw ConfigError("door event needs a positive duration");
        }
    }
};

}  // namespace larvasim
