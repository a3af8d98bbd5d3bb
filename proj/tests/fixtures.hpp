#pragma once

#include <string>
#include <vector>

#include "epec/analysis.hpp"

namespace fixtures {

// Presidential winners by state, 2008 / 2012 / 2016 / 2020 (state-level
// popular-vote winner party).
inline const std::vector<epec::StateWinners>& winner_table() {
    static const std::vector<epec::StateWinners> table = [] {
        std::vector<epec::StateWinners> t;
        auto add = [&](const char* state, const char* w) {
            t.push_back({state,
                         {std::string(1, w[0]), std::string(1, w[1]), std::string(1, w[2]),
                          std::string(1, w[3])}});
        };
        add("AL", "RRRR"); add("AK", "RRRR"); add("AZ", "RRRD"); add("AR", "RRRR");
        add("CA", "DDDD"); add("CO", "DDDD"); add("CT", "DDDD"); add("DE", "DDDD");
        add("DC", "DDDD"); add("FL", "DDRR"); add("GA", "RRRD"); add("HI", "DDDD");
        add("ID", "RRRR"); add("IL", "DDDD"); add("IN", "DRRR"); add("IA", "DDRR");
        add("KS", "RRRR"); add("KY", "RRRR"); add("LA", "RRRR"); add("ME", "DDDD");
        add("MD", "DDDD"); add("MA", "DDDD"); add("MI", "DDRD"); add("MN", "DDDD");
        add("MS", "RRRR"); add("MO", "RRRR"); add("MT", "RRRR"); add("NE", "RRRR");
        add("NV", "DDDD"); add("NH", "DDDD"); add("NJ", "DDDD"); add("NM", "DDDD");
        add("NY", "DDDD"); add("NC", "DRRR"); add("ND", "RRRR"); add("OH", "DDRR");
        add("OK", "RRRR"); add("OR", "DDDD"); add("PA", "DDRD"); add("RI", "DDDD");
        add("SC", "RRRR"); add("SD", "RRRR"); add("TN", "RRRR"); add("TX", "RRRR");
        add("UT", "RRRR"); add("VT", "DDDD"); add("VA", "DDDD"); add("WA", "DDDD");
        add("WV", "RRRR"); add("WI", "DDRD"); add("WY", "RRRR");
        return t;
    }();
    return table;
}

inline const std::vector<std::string>& swing_states() {
    static const std::vector<std::string> states{"AZ", "GA", "IN", "NC", "FL",
                                                 "IA", "OH", "WI", "MI", "PA"};
    return states;
}

} // namespace fixtures
