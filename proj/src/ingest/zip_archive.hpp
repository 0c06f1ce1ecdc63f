#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sheetscape::detail {

/// Read-only view of a ZIP container held in memory. Supports stored and
/// deflated entries; ZIP64 and encryption are rejected.
class ZipArchive {
 public:
  /// Throws NotAZip when no end-of-central-directory record is found or the
  /// directory is inconsistent.
  explicit ZipArchive(std::span<const std::byte> bytes);

  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;

  /// Decompressed entry contents, or nullopt when absent. Throws
  /// MalformedPart if the entry cannot be decoded.
  std::optional<std::string> read(const std::string& name) const;

 private:
  struct Entry {
    std::string name;
    std::uint16_t method = 0;
    std::uint16_t flags = 0;
    std::uint32_t crc32 = 0;
    std::uint32_t compressed_size = 0;
    std::uint32_t uncompressed_size = 0;
    std::uint32_t local_header_offset = 0;
  };

  const Entry* find(const std::string& name) const;

  std::span<const std::byte> bytes_;
  std::vector<Entry> entries_;
};

}  // namespace sheetscape::detail
