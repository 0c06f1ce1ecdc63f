#include "sheetscape/errors.hpp"
#include "sheetscape/export.hpp"
#include "sheetscape/service.hpp"

#include <fstream>
#include <random>

namespace sheetscape {

struct SessionManager::Session {
  std::string id;
  CellGrid grid;
  CellRange range;
  SceneConfig config;
  SceneModel scene;
  Revision revision = 0;
  mutable std::vector<std::weak_ptr<Subscriber>> subscribers;
  mutable std::shared_mutex mutex;

  Session(std::string id_, CellGrid grid_, CellRange range_, SceneConfig config_)
      : id(std::move(id_)), grid(std::move(grid_)), range(range_), config(std::move(config_)) {}

  GridView view() const { return GridView(grid, range); }

  void broadcast(const std::string& frame) const {
    std::erase_if(subscribers, [](const auto& w) { return w.expired(); });
    for (const auto& w : subscribers) {
      if (auto s = w.lock()) s->deliver(frame);
    }
  }
};

SessionManager::SessionManager(std::optional<std::filesystem::path> save_dir)
    : save_dir_(std::move(save_dir)) {}

SessionManager::~SessionManager() = default;

std::string SessionManager::fresh_id() {
  static const char* digits = "0123456789abcdef";
  std::random_device rd;
  for (;;) {
    std::string id;
    for (int k = 0; k < 4; ++k) {
      std::uint32_t word = rd();
      for (int n = 0; n < 8; ++n, word >>= 4) id.push_back(digits[word & 15]);
    }
    if (!sessions_.count(id)) return id;
  }
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(registry_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw UnknownSession("no session " + id);
  return it->second;
}

SessionSummary SessionManager::create_session(std::span<const std::byte> workbook,
                                              const SessionSpec& spec) {
  spec.config.validate();
  CellGrid grid = read_workbook(workbook, spec.ingest);
  const CellRange range = spec.range.value_or(grid.full_range());
  SceneModel scene = build_scene(select_range(grid, range), spec.config, true);

  std::lock_guard lock(registry_mutex_);
  auto session =
      std::make_shared<Session>(fresh_id(), std::move(grid), range, spec.config);
  session->scene = std::move(scene);
  sessions_.emplace(session->id, session);
  return {session->id, session->grid.n_rows(), session->grid.n_cols(), range, 0};
}

DeltaMessage SessionManager::handle_edit(const std::string& id, const EditCell& edit) {
  auto s = find(id);
  std::unique_lock lock(s->mutex);
  if (edit.base_revision != s->revision) {
    throw StaleRevision("edit based on revision " + std::to_string(edit.base_revision) +
                        ", session is at " + std::to_string(s->revision));
  }
  if (!s->range.contains(edit.addr)) {
    throw RangeOutOfBounds("cell " + to_string(edit.addr) + " is outside the view " +
                           to_string(s->range));
  }

  const Cell before = s->grid.at(edit.addr);
  DeltaMessage msg;
  try {
    apply_edit(s->grid, edit.addr, edit.raw);
    const GridView view = s->view();
    msg.delta = rebuild_after_edit(s->scene, view, edit.addr, s->config);
    if (msg.delta.kind == SceneDelta::Kind::Incremental) {
      SceneModel next = s->scene;
      apply_delta(next, msg.delta);
      s->scene = std::move(next);
    } else {
      s->scene = build_scene(view, s->config, true);
      msg.scene = s->scene;
    }
  } catch (...) {
    s->grid.at(edit.addr) = before;
    throw;
  }
  msg.revision = ++s->revision;
  s->broadcast(encode_message(msg));
  return msg;
}

namespace {

Selection make_selection(const CellGrid& grid, const SceneModel& scene, const CellAddress& a) {
  const Cell& c = grid.at(a);
  return {a, format_value(c.value, c.format.category), scene.glyph_for(a)};
}

}  // namespace

Selection SessionManager::handle_select(const std::string& id, const SelectCell& select) {
  auto s = find(id);
  std::unique_lock lock(s->mutex);
  if (!s->range.contains(select.addr)) {
    throw RangeOutOfBounds("cell " + to_string(select.addr) + " is outside the view " +
                           to_string(s->range));
  }
  Selection sel = make_selection(s->grid, s->scene, select.addr);
  s->broadcast(encode_message(sel));
  return sel;
}

Selection SessionManager::handle_select(const std::string& id, const SelectGlyph& select) {
  auto s = find(id);
  std::unique_lock lock(s->mutex);
  const auto addr = s->scene.address_of(select.glyph_id);
  if (!addr) throw UnknownGlyph("no pickable glyph " + std::to_string(select.glyph_id));
  Selection sel = make_selection(s->grid, s->scene, *addr);
  sel.glyph_id = select.glyph_id;
  s->broadcast(encode_message(sel));
  return sel;
}

SceneSnapshot SessionManager::get_snapshot(const std::string& id) const {
  auto s = find(id);
  std::shared_lock lock(s->mutex);
  return {s->revision, s->scene};
}

AnomalyReport SessionManager::anomalies(const std::string& id,
                                        const DetectorParams& params) const {
  auto s = find(id);
  std::shared_lock lock(s->mutex);
  return run_report(s->view(), params);
}

SessionSummary SessionManager::summary(const std::string& id) const {
  auto s = find(id);
  std::shared_lock lock(s->mutex);
  return {s->id, s->grid.n_rows(), s->grid.n_cols(), s->range, s->revision};
}

CellGrid SessionManager::grid(const std::string& id) const {
  auto s = find(id);
  std::shared_lock lock(s->mutex);
  return s->grid;
}

void SessionManager::subscribe(const std::string& id,
                               const std::shared_ptr<Subscriber>& subscriber) {
  auto s = find(id);
  std::unique_lock lock(s->mutex);
  subscriber->deliver(encode_message(SceneSnapshot{s->revision, s->scene}));
  s->subscribers.push_back(subscriber);
}

void SessionManager::resend_snapshot(const std::string& id, Subscriber& subscriber) const {
  auto s = find(id);
  std::unique_lock lock(s->mutex);
  subscriber.deliver(encode_message(SceneSnapshot{s->revision, s->scene}));
}

void SessionManager::unsubscribe(const std::string& id, const Subscriber* subscriber) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(registry_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return;
    s = it->second;
  }
  std::unique_lock lock(s->mutex);
  std::erase_if(s->subscribers, [&](const auto& w) {
    auto p = w.lock();
    return !p || p.get() == subscriber;
  });
}

std::optional<std::filesystem::path> SessionManager::close(const std::string& id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(registry_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw UnknownSession("no session " + id);
    s = it->second;
    sessions_.erase(it);
  }
  std::unique_lock lock(s->mutex);
  s->subscribers.clear();
  if (!save_dir_) return std::nullopt;
  std::filesystem::create_directories(*save_dir_);
  const auto path = *save_dir_ / (id + ".csv");
  std::ofstream out(path, std::ios::binary);
  out << write_csv(s->grid);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return path;
}

std::size_t SessionManager::session_count() const {
  std::lock_guard lock(registry_mutex_);
  return sessions_.size();
}

}  // namespace sheetscape
