#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "mgres/resilience.hpp"

namespace mgres {

namespace {

constexpr std::array<char, 8> kMagic = {'M', 'G', 'R', 'E', 'S', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& out, T value) {
    std::array<unsigned char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
    std::array<unsigned char, sizeof(T)> bytes;
    in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint file truncated");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

}  // namespace

void CheckpointStore::write(const Cluster& cluster, int cycle) {
    Snapshot snap;
    snap.coarse_cells = cluster.hierarchy().coarse_cells();
    snap.finest_level = cluster.hierarchy().finest_level();
    snap.counts = cluster.partition().counts();
    const int finest = snap.finest_level;
    for (int r = 0; r < cluster.rank_count(); ++r) {
        const Field& u = cluster.rank(r).field(finest, FieldKind::Solution);
        const Box& closed = cluster.partition().subdomain(r).closed[static_cast<std::size_t>(finest)];
        std::vector<double> values;
        values.reserve(closed.size());
        for (int k = closed.lo.k; k <= closed.hi.k; ++k) {
            for (int j = closed.lo.j; j <= closed.hi.j; ++j) {
                for (int i = closed.lo.i; i <= closed.hi.i; ++i) values.push_back(u(i, j, k));
            }
        }
        snap.ranks.push_back(std::move(values));
    }
    snapshots_[cycle] = std::move(snap);
    ++writes_;
    while (retain_ > 0 && snapshots_.size() > retain_) snapshots_.erase(snapshots_.begin());
}

std::size_t CheckpointStore::bytes_stored() const {
    std::size_t bytes = 0;
    for (const auto& [cycle, snap] : snapshots_) {
        for (const auto& values : snap.ranks) bytes += values.size() * sizeof(double);
    }
    return bytes;
}

const CheckpointStore::Snapshot& CheckpointStore::snapshot(const Cluster& cluster, int cycle) const {
    const auto it = snapshots_.find(cycle);
    if (it == snapshots_.end()) throw std::out_of_range("no checkpoint for cycle " + std::to_string(cycle));
    const Snapshot& snap = it->second;
    if (snap.coarse_cells != cluster.hierarchy().coarse_cells() ||
        snap.finest_level != cluster.hierarchy().finest_level() || !(snap.counts == cluster.partition().counts())) {
        throw std::invalid_argument("checkpoint layout does not match the cluster");
    }
    return snap;
}

void CheckpointStore::restore_rank(Cluster& cluster, int rank, int cycle) const {
    const Snapshot& snap = snapshot(cluster, cycle);
    const int finest = snap.finest_level;
    Field& u = cluster.rank(rank).field(finest, FieldKind::Solution);
    const Box& closed = cluster.partition().subdomain(rank).closed[static_cast<std::size_t>(finest)];
    const auto& values = snap.ranks.at(static_cast<std::size_t>(rank));
    if (values.size() != closed.size()) throw std::invalid_argument("checkpoint rank size does not match its box");
    std::size_t n = 0;
    for (int k = closed.lo.k; k <= closed.hi.k; ++k) {
        for (int j = closed.lo.j; j <= closed.hi.j; ++j) {
            for (int i = closed.lo.i; i <= closed.hi.i; ++i) u(i, j, k) = values[n++];
        }
    }
}

void CheckpointStore::restore(Cluster& cluster, int cycle) const {
    for (int r = 0; r < cluster.rank_count(); ++r) restore_rank(cluster, r, cycle);
    cluster.ghost_exchange(cluster.hierarchy().finest_level(), FieldKind::Solution);
}

void CheckpointStore::save(const std::filesystem::path& path, int cycle) const {
    const auto it = snapshots_.find(cycle);
    if (it == snapshots_.end()) throw std::out_of_range("no checkpoint for cycle " + std::to_string(cycle));
    const Snapshot& snap = it->second;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(kMagic.data(), kMagic.size());
    write_le<std::uint32_t>(out, kVersion);
    write_le<std::int32_t>(out, snap.coarse_cells);
    write_le<std::int32_t>(out, snap.finest_level);
    write_le<std::int32_t>(out, snap.counts.x);
    write_le<std::int32_t>(out, snap.counts.y);
    write_le<std::int32_t>(out, snap.counts.z);
    write_le<std::int64_t>(out, cycle);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(snap.ranks.size()));
    for (const auto& values : snap.ranks) {
        write_le<std::uint64_t>(out, values.size());
        for (const double v : values) write_le<double>(out, v);
    }
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

CheckpointStore CheckpointStore::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw std::runtime_error(path.string() + " is not a checkpoint file");
    if (read_le<std::uint32_t>(in) != kVersion) throw std::runtime_error("unsupported checkpoint version");
    Snapshot snap;
    snap.coarse_cells = read_le<std::int32_t>(in);
    snap.finest_level = read_le<std::int32_t>(in);
    snap.counts.x = read_le<std::int32_t>(in);
    snap.counts.y = read_le<std::int32_t>(in);
    snap.counts.z = read_le<std::int32_t>(in);
    const auto cycle = static_cast<int>(read_le<std::int64_t>(in));
    const auto ranks = read_le<std::uint32_t>(in);
    if (static_cast<int>(ranks) != snap.counts.total()) throw std::runtime_error("checkpoint rank count mismatch");
    for (std::uint32_t r = 0; r < ranks; ++r) {
        const auto count = read_le<std::uint64_t>(in);
        std::vector<double> values(count);
        for (auto& v : values) v = read_le<double>(in);
        snap.ranks.push_back(std::move(values));
    }
    CheckpointStore store;
    store.snapshots_[cycle] = std::move(snap);
    return store;
}

}  // namespace mgres
