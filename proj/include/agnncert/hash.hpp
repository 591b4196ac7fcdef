#pragma once

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "agnncert/graph.hpp"

namespace agnncert {

enum class HashAlgorithm { Md5, Sha256 };

inline std::string to_string(HashAlgorithm a) {
  return a == HashAlgorithm::Md5 ? "md5" : "sha256";
}

/// Hash configuration for graph division: the digest algorithm and the fixed
/// decimal width L every node id is zero-padded to before hashing.
struct HashScheme {
  HashAlgorithm algorithm = HashAlgorithm::Md5;
  int pad_length = 10;
};

/// Decimal representation of u left-padded with '0' to exactly L characters.
inline std::string pad_index(NodeId u, int L) {
  if (u < 0) throw std::invalid_argument("node id must be non-negative");
  std::string s = std::to_string(u);
  if (static_cast<int>(s.size()) > L) {
    throw std::invalid_argument("id " + s + " exceeds pad length " +
                                std::to_string(L));
  }
  return std::string(L - s.size(), '0') + s;
}

struct Digest {
  std::array<unsigned char, EVP_MAX_MD_SIZE> bytes{};
  unsigned int size = 0;

  std::span<const unsigned char> view() const { return {bytes.data(), size}; }
};

inline Digest hash_digest(HashAlgorithm algorithm, std::string_view message) {
  Digest d;
  const EVP_MD* md =
      algorithm == HashAlgorithm::Md5 ? EVP_md5() : EVP_sha256();
  if (EVP_Digest(message.data(), message.size(), d.bytes.data(), &d.size, md,
                 nullptr) != 1) {
    throw std::runtime_error("EVP_Digest failed");
  }
  return d;
}

/// Big-endian reduction of the full digest mod T, shifted into [1, T].
inline int digest_to_index(std::span<const unsigned char> digest, int T) {
  if (T < 1) throw std::invalid_argument("subgraph count T must be >= 1");
  std::uint64_t acc = 0;
  for (unsigned char b : digest) {
    acc = (acc * 256 + b) % static_cast<std::uint64_t>(T);
  }
  return static_cast<int>(acc) + 1;
}

inline int hash_to_index(std::string_view message, int T,
                         const HashScheme& scheme) {
  return digest_to_index(hash_digest(scheme.algorithm, message).view(), T);
}

/// Subgraph index of an edge: hash of the concatenated padded endpoints in
/// canonical order, so undirected (u,v) and (v,u) map identically.
inline int edge_subgraph_index(NodeId u, NodeId v, int T,
                               const HashScheme& scheme, bool directed) {
  const auto [a, b] = canonicalize_edge(u, v, directed);
  return hash_to_index(
      pad_index(a, scheme.pad_length) + pad_index(b, scheme.pad_length), T,
      scheme);
}

/// Subgraph index of a node; all of the node's outgoing edges share it.
inline int node_subgraph_index(NodeId u, int T, const HashScheme& scheme) {
  return hash_to_index(pad_index(u, scheme.pad_length), T, scheme);
}

}  // namespace agnncert
