#include "delaymap/topology.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace delaymap {

namespace {

std::string path_loc(int id) { return "path " + std::to_string(id); }

}  // namespace

Network::Network(std::vector<std::string> nodes, std::vector<Link> links,
                 std::vector<std::string> end_nodes, std::vector<Path> paths)
    : nodes_(std::move(nodes)),
      links_(std::move(links)),
      end_nodes_(std::move(end_nodes)),
      paths_(std::move(paths)) {
    std::set<std::string> node_set;
    for (const auto& n : nodes_) {
        if (!node_set.insert(n).second)
            throw TopologyError("duplicate node id '" + n + "'");
    }
    for (std::size_t i = 0; i < links_.size(); ++i) {
        const Link& l = links_[i];
        if (!node_set.count(l.from))
            throw TopologyError("link '" + l.id + "': unknown node '" + l.from + "'");
        if (!node_set.count(l.to))
            throw TopologyError("link '" + l.id + "': unknown node '" + l.to + "'");
        if (!link_index_.emplace(l.id, static_cast<int>(i)).second)
            throw TopologyError("duplicate link id '" + l.id + "'");
    }
    std::set<std::string> end_set;
    for (const auto& n : end_nodes_) {
        if (!node_set.count(n))
            throw TopologyError("end node '" + n + "' is not a declared node");
        if (!end_set.insert(n).second)
            throw TopologyError("duplicate end node '" + n + "'");
    }
    if (paths_.empty()) throw TopologyError("network declares no paths");
    for (std::size_t i = 0; i < paths_.size(); ++i) {
        const Path& p = paths_[i];
        if (p.id != static_cast<int>(i))
            throw TopologyError(path_loc(p.id) + ": ids must be dense and in file order (expected " +
                                std::to_string(i) + ")");
        if (p.links.empty()) throw TopologyError(path_loc(p.id) + ": has no links");
        if (!end_set.count(p.origin))
            throw TopologyError(path_loc(p.id) + ": origin '" + p.origin + "' is not an end node");
        std::set<std::string> seen_links;
        const Link* prev = nullptr;
        for (std::size_t j = 0; j < p.links.size(); ++j) {
            auto it = link_index_.find(p.links[j]);
            if (it == link_index_.end())
                throw TopologyError(path_loc(p.id) + ", hop " + std::to_string(j) +
                                    ": unknown link '" + p.links[j] + "'");
            const Link& l = links_[it->second];
            if (!seen_links.insert(l.id).second)
                throw TopologyError(path_loc(p.id) + ": link '" + l.id + "' repeated");
            if (j == 0) {
                if (l.from != p.origin)
                    throw TopologyError(path_loc(p.id) + ": origin '" + p.origin +
                                        "' does not match first link source '" + l.from + "'");
            } else if (prev->to != l.from) {
                throw TopologyError(path_loc(p.id) + ", hop " + std::to_string(j) +
                                    ": link '" + l.id + "' starts at '" + l.from +
                                    "' but previous link ends at '" + prev->to + "'");
            }
            prev = &l;
        }
        by_origin_[p.origin].push_back(p.id);
    }
}

int Network::link_index(const std::string& link_id) const {
    auto it = link_index_.find(link_id);
    if (it == link_index_.end()) throw TopologyError("unknown link '" + link_id + "'");
    return it->second;
}

std::vector<int> Network::paths_by_origin(const std::string& node) const {
    if (std::find(end_nodes_.begin(), end_nodes_.end(), node) == end_nodes_.end())
        throw TopologyError("unknown end node '" + node + "'");
    auto it = by_origin_.find(node);
    if (it == by_origin_.end()) return {};
    return it->second;
}

std::vector<std::vector<int>> Network::origin_groups() const {
    std::vector<std::vector<int>> groups;
    groups.reserve(end_nodes_.size());
    for (const auto& n : end_nodes_) groups.push_back(paths_by_origin(n));
    return groups;
}

Network load_network(const nlohmann::json& doc) {
    try {
        std::vector<std::string> nodes = doc.at("nodes").get<std::vector<std::string>>();
        std::vector<std::string> end_nodes = doc.at("end_nodes").get<std::vector<std::string>>();
        std::vector<Link> links;
        for (const auto& l : doc.at("links"))
            links.push_back({l.at("id").get<std::string>(), l.at("from").get<std::string>(),
                             l.at("to").get<std::string>()});
        std::vector<Path> paths;
        for (const auto& p : doc.at("paths"))
            paths.push_back({p.at("id").get<int>(), p.at("origin").get<std::string>(),
                             p.at("links").get<std::vector<std::string>>()});
        return Network(std::move(nodes), std::move(links), std::move(end_nodes), std::move(paths));
    } catch (const nlohmann::json::exception& e) {
        throw TopologyError(std::string("malformed topology document: ") + e.what());
    }
}

Network load_network_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TopologyError("cannot open topology file '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw TopologyError("cannot parse '" + path + "': " + e.what());
    }
    return load_network(doc);
}

Eigen::MatrixXd routing_matrix(const Network& net) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(net.path_count(), net.link_count());
    for (const Path& p : net.paths())
        for (const auto& lid : p.links) r(p.id, net.link_index(lid)) = 1.0;
    return r;
}

Eigen::MatrixXd gramian(const Eigen::MatrixXd& routing) {
    return routing * routing.transpose();
}

}  // namespace delaymap
