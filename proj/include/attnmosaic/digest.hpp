#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace attnmosaic {

/// Incremental SHA-256 used for content digests in run manifests.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    Sha256& update(std::span<const std::uint8_t> bytes);
    Sha256& update(std::string_view text);
    Sha256& update_u64(std::uint64_t value);   // little-endian
    Sha256& update_f64(double value);          // IEEE-754 bits, little-endian

    /// Lower-case hex digest. The object must not be updated afterwards.
    std::string hex();

private:
    void* ctx_;
};

std::string sha256_hex(std::span<const std::uint8_t> bytes);

}  // namespace attnmosaic
