#ifndef DELAYMAP_TOPOLOGY_HPP
#define DELAYMAP_TOPOLOGY_HPP

#include <Eigen/Dense>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace delaymap {

class TopologyError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Link {
    std::string id;
    std::string from;
    std::string to;
};

struct Path {
    int id = 0;                     // dense index 0..P-1, assigned in file order
    std::string origin;             // must equal `from` of the first link
    std::vector<std::string> links; // contiguous directed link sequence
};

// Directed network with a fixed set of monitored paths. Immutable after
// construction; the constructor validates every structural invariant and
// reports the first violation with its location.
class Network {
public:
    Network(std::vector<std::string> nodes, std::vector<Link> links,
            std::vector<std::string> end_nodes, std::vector<Path> paths);

    int path_count() const { return static_cast<int>(paths_.size()); }
    int link_count() const { return static_cast<int>(links_.size()); }
    int node_count() const { return static_cast<int>(nodes_.size()); }

    const std::vector<std::string>& nodes() const { return nodes_; }
    const std::vector<Link>& links() const { return links_; }
    const std::vector<std::string>& end_nodes() const { return end_nodes_; }
    const std::vector<Path>& paths() const { return paths_; }
    const Path& path(int id) const { return paths_.at(id); }

    int link_index(const std::string& link_id) const;

    // Path ids originating at `node` (ascending). Throws on unknown node.
    std::vector<int> paths_by_origin(const std::string& node) const;

    // Per-end-node path groups in end_nodes() order; the node-budget and
    // matroid selection constraints are built from this.
    std::vector<std::vector<int>> origin_groups() const;

private:
    std::vector<std::string> nodes_;
    std::vector<Link> links_;
    std::vector<std::string> end_nodes_;
    std::vector<Path> paths_;
    std::map<std::string, int> link_index_;
    std::map<std::string, std::vector<int>> by_origin_;
};

// Parses and validates the JSON topology document (see README for the schema).
Network load_network(const nlohmann::json& doc);
Network load_network_file(const std::string& path);

// P x |E| binary path-link incidence matrix; entry (p,l) = 1 iff path p
// traverses link l.
Eigen::MatrixXd routing_matrix(const Network& net);

// G = R R^T. Diagonal counts links per path, off-diagonal counts shared links.
Eigen::MatrixXd gramian(const Eigen::MatrixXd& routing);

}  // namespace delaymap

#endif
