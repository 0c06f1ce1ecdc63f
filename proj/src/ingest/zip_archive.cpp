#include "ingest/zip_archive.hpp"

#include "sheetscape/errors.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cstring>

namespace sheetscape::detail {

namespace {

constexpr std::uint32_t kEndOfCentralDir = 0x06054b50;
constexpr std::uint32_t kCentralFileHeader = 0x02014b50;
constexpr std::uint32_t kLocalFileHeader = 0x04034b50;

std::uint16_t u16(std::span<const std::byte> b, std::size_t at) {
  return static_cast<std::uint16_t>(std::to_integer<unsigned>(b[at]) |
                                    std::to_integer<unsigned>(b[at + 1]) << 8);
}

std::uint32_t u32(std::span<const std::byte> b, std::size_t at) {
  return static_cast<std::uint32_t>(u16(b, at)) |
         static_cast<std::uint32_t>(u16(b, at + 2)) << 16;
}

}  // namespace

ZipArchive::ZipArchive(std::span<const std::byte> bytes) : bytes_(bytes) {
  constexpr std::size_t kEocdSize = 22;
  if (bytes.size() < kEocdSize) throw NotAZip("input too small for a ZIP container");

  // The EOCD record sits at the end, followed by at most 64 KiB of comment.
  const std::size_t lowest =
      bytes.size() > kEocdSize + 0xFFFF ? bytes.size() - kEocdSize - 0xFFFF : 0;
  std::optional<std::size_t> eocd;
  for (std::size_t pos = bytes.size() - kEocdSize + 1; pos-- > lowest;) {
    if (u32(bytes, pos) == kEndOfCentralDir) {
      eocd = pos;
      break;
    }
  }
  if (!eocd) throw NotAZip("no end-of-central-directory record");

  const std::uint16_t count = u16(bytes, *eocd + 10);
  const std::uint32_t dir_size = u32(bytes, *eocd + 12);
  const std::uint32_t dir_offset = u32(bytes, *eocd + 16);
  if (dir_offset == 0xFFFFFFFFu || count == 0xFFFF) {
    throw NotAZip("ZIP64 containers are not supported");
  }
  if (static_cast<std::size_t>(dir_offset) + dir_size > bytes.size()) {
    throw NotAZip("central directory outside input");
  }

  std::size_t pos = dir_offset;
  entries_.reserve(count);
  for (std::uint16_t i = 0; i < count; ++i) {
    if (pos + 46 > bytes.size() || u32(bytes, pos) != kCentralFileHeader) {
      throw NotAZip("corrupt central directory entry " + std::to_string(i));
    }
    Entry e;
    e.flags = u16(bytes, pos + 8);
    e.method = u16(bytes, pos + 10);
    e.crc32 = u32(bytes, pos + 16);
    e.compressed_size = u32(bytes, pos + 20);
    e.uncompressed_size = u32(bytes, pos + 24);
    const std::uint16_t name_len = u16(bytes, pos + 28);
    const std::uint16_t extra_len = u16(bytes, pos + 30);
    const std::uint16_t comment_len = u16(bytes, pos + 32);
    e.local_header_offset = u32(bytes, pos + 42);
    if (pos + 46 + name_len > bytes.size()) {
      throw NotAZip("truncated central directory");
    }
    e.name.assign(reinterpret_cast<const char*>(bytes.data() + pos + 46), name_len);
    entries_.push_back(std::move(e));
    pos += 46 + static_cast<std::size_t>(name_len) + extra_len + comment_len;
  }
}

const ZipArchive::Entry* ZipArchive::find(const std::string& name) const {
  // Part names are case-insensitive in OPC; exact match first.
  for (const auto& e : entries_) {
    if (e.name == name) return &e;
  }
  for (const auto& e : entries_) {
    if (e.name.size() == name.size() &&
        std::equal(e.name.begin(), e.name.end(), name.begin(), [](char a, char b) {
          return std::tolower(static_cast<unsigned char>(a)) ==
                 std::tolower(static_cast<unsigned char>(b));
        })) {
      return &e;
    }
  }
  return nullptr;
}

bool ZipArchive::contains(const std::string& name) const {
  return find(name) != nullptr;
}

std::vector<std::string> ZipArchive::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

std::optional<std::string> ZipArchive::read(const std::string& name) const {
  const Entry* e = find(name);
  if (!e) return std::nullopt;
  if (e->flags & 0x1) throw MalformedPart(name, "encrypted entry");

  const std::size_t lh = e->local_header_offset;
  if (lh + 30 > bytes_.size() || u32(bytes_, lh) != kLocalFileHeader) {
    throw MalformedPart(name, "bad local file header");
  }
  const std::size_t data_start =
      lh + 30 + u16(bytes_, lh + 26) + static_cast<std::size_t>(u16(bytes_, lh + 28));
  if (data_start + e->compressed_size > bytes_.size()) {
    throw MalformedPart(name, "entry data truncated");
  }
  const auto* src = reinterpret_cast<const Bytef*>(bytes_.data() + data_start);

  std::string out;
  if (e->method == 0) {
    out.assign(reinterpret_cast<const char*>(src), e->compressed_size);
  } else if (e->method == 8) {
    out.resize(e->uncompressed_size);
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) {
      throw MalformedPart(name, "inflate init failed");
    }
    zs.next_in = const_cast<Bytef*>(src);
    zs.avail_in = e->compressed_size;
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    const auto produced = zs.total_out;
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || produced != e->uncompressed_size) {
      throw MalformedPart(name, "deflate stream is corrupt");
    }
  } else {
    throw MalformedPart(name, "unsupported compression method " +
                                  std::to_string(e->method));
  }

  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(out.data()),
                         static_cast<uInt>(out.size()));
  if (crc != e->crc32) throw MalformedPart(name, "CRC mismatch");
  return out;
}

}  // namespace sheetscape::detail
