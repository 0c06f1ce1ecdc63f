#pragma once

#include "sheetscape/anomaly.hpp"
#include "sheetscape/grid.hpp"
#include "sheetscape/ingest.hpp"
#include "sheetscape/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sheetscape {

using Revision = std::uint64_t;

// Sync protocol messages. Each travels as one JSON text frame whose "type"
// key names the alternative; see docs/protocol.md.

struct EditCell {
  CellAddress addr;
  std::string raw;
  Revision base_revision = 0;

  friend bool operator==(const EditCell&, const EditCell&) = default;
};

struct SelectCell {
  CellAddress addr;

  friend bool operator==(const SelectCell&, const SelectCell&) = default;
};

struct SelectGlyph {
  GlyphId glyph_id = 0;

  friend bool operator==(const SelectGlyph&, const SelectGlyph&) = default;
};

/// Client request for a fresh snapshot (after StaleRevision, say).
struct SnapshotRequest {
  friend bool operator==(const SnapshotRequest&, const SnapshotRequest&) = default;
};

/// A FullRebuild delta carries the rebuilt scene so that clients can replace
/// theirs without a second round trip.
struct DeltaMessage {
  Revision revision = 0;
  SceneDelta delta;
  std::optional<SceneModel> scene;

  friend bool operator==(const DeltaMessage&, const DeltaMessage&) = default;
};

struct Selection {
  CellAddress addr;
  std::string value_preview;
  std::optional<GlyphId> glyph_id;

  friend bool operator==(const Selection&, const Selection&) = default;
};

struct SceneSnapshot {
  Revision revision = 0;
  SceneModel scene;

  friend bool operator==(const SceneSnapshot&, const SceneSnapshot&) = default;
};

struct ErrorMessage {
  std::string code;
  std::string detail;

  friend bool operator==(const ErrorMessage&, const ErrorMessage&) = default;
};

using SyncMessage = std::variant<EditCell, SelectCell, SelectGlyph, SnapshotRequest,
                                 DeltaMessage, Selection, SceneSnapshot, ErrorMessage>;

std::string encode_message(const SyncMessage& message);

/// Throws BadMessage for malformed JSON, an unknown type or missing fields.
SyncMessage decode_message(std::string_view text);

/// Error frame for an exception escaping a handler.
ErrorMessage error_message_for(const std::exception& e);

/// Receives encoded frames. deliver() is called with the session lock held,
/// so implementations should queue rather than block.
class Subscriber {
 public:
  virtual ~Subscriber() = default;
  virtual void deliver(const std::string& frame) = 0;
};

struct SessionSpec {
  IngestOptions ingest;
  std::optional<CellRange> range;  // full used range when unset
  SceneConfig config;
};

struct SessionSummary {
  std::string id;
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  CellRange range;
  Revision revision = 0;
};

/// Holds every live session. Edits within a session are serialized; reads
/// (snapshots, reports) share the lock. Broadcasts happen under the session
/// lock, so each subscriber sees frames in revision order.
class SessionManager {
 public:
  /// With save_dir set, closing a session writes its grid as <id>.csv there.
  explicit SessionManager(std::optional<std::filesystem::path> save_dir = std::nullopt);
  ~SessionManager();

  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  /// Throws IngestError, RangeOutOfBounds, or std::invalid_argument for a
  /// bad config. Scenes of views with nothing to draw are allowed.
  SessionSummary create_session(std::span<const std::byte> workbook, const SessionSpec& spec);

  /// Throws UnknownSession, StaleRevision (state untouched) or
  /// RangeOutOfBounds for an address outside the active view.
  DeltaMessage handle_edit(const std::string& id, const EditCell& edit);

  /// Throws UnknownSession and RangeOutOfBounds / UnknownGlyph.
  Selection handle_select(const std::string& id, const SelectCell& select);
  Selection handle_select(const std::string& id, const SelectGlyph& select);

  SceneSnapshot get_snapshot(const std::string& id) const;
  AnomalyReport anomalies(const std::string& id, const DetectorParams& params) const;
  SessionSummary summary(const std::string& id) const;
  CellGrid grid(const std::string& id) const;

  /// Registers a subscriber and hands it the current snapshot frame first,
  /// atomically with respect to edits. Only a weak reference is kept;
  /// expired subscribers are dropped on the next broadcast.
  void subscribe(const std::string& id, const std::shared_ptr<Subscriber>& subscriber);

  /// Sends the current snapshot frame to one subscriber, ordered with
  /// respect to broadcasts.
  void resend_snapshot(const std::string& id, Subscriber& subscriber) const;

  void unsubscribe(const std::string& id, const Subscriber* subscriber);

  /// Throws UnknownSession. Returns the write-through path, if any.
  std::optional<std::filesystem::path> close(const std::string& id);

  std::size_t session_count() const;

 private:
  struct Session;

  std::shared_ptr<Session> find(const std::string& id) const;
  std::string fresh_id();

  std::optional<std::filesystem::path> save_dir_;
  mutable std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace sheetscape
