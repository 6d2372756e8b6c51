#pragma once

#include <json.hpp>
#include "mtgcd/vecfield/bins.hpp"

namespace mtgcd::vecfield {

inline void to_json(nlohmann::json& j, const BinTable& t) {
    j = nlohmann::json{{"edges", t.edges}, {"representatives", t.representatives}};
}

inline void from_json(const nlohmann::json& j, BinTable& t) {
    const BinTable def = BinTable::standard();
    t.edges = j.value("edges", def.edges);
    t.representatives = j.value("representatives", def.representatives);
}

} // namespace mtgcd::vecfield
