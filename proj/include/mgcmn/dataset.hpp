#pragma once

#include "mgcmn/graph.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgcmn {

/// A labeled graph plus load-time bookkeeping.
struct Dataset {
    Graph graph;
    std::string name;
    std::vector<std::string> class_names;
    /// External node IDs in internal order, when the source had its own IDs.
    std::vector<std::string> node_ids;
    /// Edge records as they appeared in the source, before cleaning.
    std::size_t raw_edge_records = 0;
    std::vector<std::string> warnings;

    std::size_t classes_present() const {
        std::set<int> seen;
        for (int y : graph.labels())
            if (y != kUnlabeled) seen.insert(y);
        return seen.size();
    }
};

struct Splits {
    std::vector<NodeId> train;
    std::vector<NodeId> validation;
    std::vector<NodeId> test;

    /// Pairwise disjoint, train nonempty, every index below n.
    void validate(std::size_t n) const {
        if (train.empty()) throw std::invalid_argument("splits: train set is empty");
        std::vector<char> owner(n, 0);
        auto claim = [&](const std::vector<NodeId>& part, char tag, const char* name) {
            for (NodeId v : part) {
                if (v >= n) throw std::out_of_range(std::string("splits: ") + name + " index " + std::to_string(v) +
                                                    " out of range");
                if (owner[v]) throw std::invalid_argument("splits: node " + std::to_string(v) +
                                                          " appears in more than one split");
                owner[v] = tag;
            }
        };
        claim(train, 1, "train");
        claim(validation, 2, "validation");
        claim(test, 3, "test");
    }

    friend bool operator==(const Splits&, const Splits&) = default;
};

}  // namespace mgcmn
