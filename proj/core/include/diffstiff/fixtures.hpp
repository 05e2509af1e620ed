#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "diffstiff/model.hpp"

namespace diffstiff::fixtures {

/// Problem plus notes on which values are reconstructed or assumed.
struct Fixture {
    std::string name;
    Problem problem;
    std::vector<std::string> notes;
};

Material steel();
Material glulam();

/// One truss bar along x, EA/L = 1, 1 kN axial load.
Fixture unit_bar();
/// Two bars from a wall to a loaded tip: one in tension, one in compression.
Fixture bracket();
/// Horizontal frame cantilever with a transverse tip load.
Fixture cantilever();

/// 12-bay planar Warren truss, 10 m span: 25 nodes, 47 elements, 36 mirrored
/// variables, 72 constraints.
Fixture warren();

enum class RoofVariant {
    Independent,  // one area per element, mirrored z offsets
    Grouped,      // top chord / web / bottom chord areas, mirrored z offsets
};
/// Square-on-offset-square space truss, 24 m x 24 m, 2.25 m deep, supported
/// along two edges. bays = 8 gives 145 nodes and 512 elements.
Fixture roof(int bays = 8, RoofVariant variant = RoofVariant::Independent);

/// Six planar tube frames of 30 elements each, sized by one (d, alpha) pair.
Fixture frames(int count = 6);

/// Frames augmented with strut/tie/spine systems. shape: compliance
/// minimization over strut lengths and anchor positions (L-BFGS). Otherwise
/// four-group tube sizing under stress, deflection and diameter ordering (MMA).
/// Frames first .. first + count - 1 of the frames fixture are used.
Fixture spine(int count = 6, bool shape = true, int first = 0);

/// Doubly cantilevered planar bridge, 56.5 m main span, steel/glulam groups.
/// desk: fewer panels and three groups.
Fixture bridge(bool desk = false);

/// Canonical fixture names accepted by by_name.
std::vector<std::string> names();
Fixture by_name(const std::string& name);

/// Problem document with the notes attached under "notes".
nlohmann::json to_json(const Fixture& fixture);

}  // namespace diffstiff::fixtures
