#include "service/multipart.hpp"

#include "sheetscape/errors.hpp"
#include "sheetscape/export.hpp"
#include "sheetscape/server.hpp"

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <deque>
#include <iostream>
#include <thread>

namespace sheetscape {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using ojson = nlohmann::ordered_json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double number_field(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || p != end || !std::isfinite(v)) {
    throw std::invalid_argument("field " + key + ": not a number: " + text);
  }
  return v;
}

std::size_t count_field(const std::string& key, const std::string& text) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || p != end) {
    throw std::invalid_argument("field " + key + ": not a non-negative integer: " + text);
  }
  return v;
}

bool bool_field(const std::string& key, const std::string& text) {
  if (text.empty() || text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw std::invalid_argument("field " + key + ": not a boolean: " + text);
}

}  // namespace

SessionSpec session_spec_from_fields(const std::map<std::string, std::string>& fields) {
  SessionSpec spec;
  for (const auto& [key, value] : fields) {
    if (key == "sheet") {
      spec.ingest.sheet_name = value;
    } else if (key == "delimiter") {
      if (value.size() != 1) throw std::invalid_argument("field delimiter: need one character");
      spec.ingest.csv_delimiter = value == "t" ? '\t' : value[0];
    } else if (key == "range") {
      spec.range = parse_range(value);
      if (!spec.range) throw std::invalid_argument("field range: expected r,c:r,c, got " + value);
    } else if (key == "mode") {
      auto mode = parse_glyph_mode(value);
      if (!mode) throw std::invalid_argument("field mode: expected bars or surface");
      spec.config.glyph_mode = *mode;
    } else if (key == "normalize") {
      auto mode = parse_normalization_mode(value);
      if (!mode) throw std::invalid_argument("field normalize: expected uniform or per-format");
      spec.config.policy.mode = *mode;
    } else if (key == "signed") {
      spec.config.policy.signed_baseline = bool_field(key, value);
    } else if (key == "hmax") {
      spec.config.policy.height_max = number_field(key, value);
    } else if (key == "pitch") {
      spec.config.cell_pitch = number_field(key, value);
    } else {
      throw std::invalid_argument("unknown field " + key);
    }
  }
  spec.config.validate();
  return spec;
}

DetectorParams detector_params_from_fields(const std::map<std::string, std::string>& fields) {
  DetectorParams params;
  for (const auto& [key, value] : fields) {
    if (key == "z") {
      params.z_threshold = number_field(key, value);
    } else if (key == "axis") {
      params.series_axis = parse_axis(value);
      if (!params.series_axis) throw std::invalid_argument("field axis: expected rows or cols");
    } else if (key == "window") {
      params.window_radius = count_field(key, value);
    } else if (key == "tab-run") {
      params.tab_min_run = count_field(key, value);
    } else {
      throw std::invalid_argument("unknown field " + key);
    }
  }
  params.validate();
  return params;
}

namespace {

using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

std::string_view sv(beast::string_view s) { return {s.data(), s.size()}; }

std::string url_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      out.push_back(' ');
    } else if (s[i] == '%' && i + 2 < s.size()) {
      unsigned v = 0;
      auto [p, ec] = std::from_chars(s.data() + i + 1, s.data() + i + 3, v, 16);
      if (ec != std::errc{} || p != s.data() + i + 3) throw BadMessage("bad percent escape");
      out.push_back(static_cast<char>(v));
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

struct Target {
  std::vector<std::string> segments;
  std::map<std::string, std::string> query;
};

Target parse_target(std::string_view target) {
  Target t;
  const auto q = target.find('?');
  std::string_view path = target.substr(0, q);
  while (!path.empty()) {
    if (path.front() == '/') {
      path.remove_prefix(1);
      continue;
    }
    const auto slash = path.find('/');
    t.segments.push_back(url_decode(path.substr(0, slash)));
    path = slash == std::string_view::npos ? std::string_view{} : path.substr(slash);
  }
  if (q != std::string_view::npos) {
    std::string_view query = target.substr(q + 1);
    while (!query.empty()) {
      const auto amp = query.find('&');
      const std::string_view item = query.substr(0, amp);
      if (!item.empty()) {
        const auto eq = item.find('=');
        t.query[url_decode(item.substr(0, eq))] =
            eq == std::string_view::npos ? "" : url_decode(item.substr(eq + 1));
      }
      query = amp == std::string_view::npos ? std::string_view{} : query.substr(amp + 1);
    }
  }
  return t;
}

http::status status_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->code()) {
      case ErrorCode::UnknownSession: return http::status::not_found;
      case ErrorCode::StaleRevision: return http::status::conflict;
      case ErrorCode::SceneTooLarge: return http::status::payload_too_large;
      default: return http::status::bad_request;
    }
  }
  if (dynamic_cast<const std::invalid_argument*>(&e)) return http::status::bad_request;
  return http::status::internal_server_error;
}

Response make_response(unsigned version, bool keep_alive, http::status status,
                       std::string body) {
  Response res{status, version};
  res.set(http::field::server, "sheetscape");
  res.set(http::field::content_type, "application/json");
  res.set(http::field::access_control_allow_origin, "*");
  res.keep_alive(keep_alive);
  res.body() = std::move(body);
  res.prepare_payload();
  return res;
}

std::string error_body(const std::string& code, const std::string& detail) {
  return encode_message(ErrorMessage{code, detail});
}

Response create_session(SessionManager& sessions, const Request& req, const Target& target) {
  std::map<std::string, std::string> fields = target.query;
  std::string workbook;
  bool have_workbook = false;
  const auto boundary = detail::multipart_boundary(sv(req[http::field::content_type]));
  if (boundary) {
    for (auto& part : detail::parse_multipart(req.body(), *boundary)) {
      if (part.name == "workbook" || (part.filename && !have_workbook)) {
        workbook = std::move(part.body);
        have_workbook = true;
      } else {
        fields[part.name] = part.body;
      }
    }
  } else {
    workbook = req.body();
    have_workbook = !workbook.empty();
  }
  if (!have_workbook) throw BadMessage("request carries no workbook");

  const SessionSpec spec = session_spec_from_fields(fields);
  const auto bytes = std::as_bytes(std::span(workbook.data(), workbook.size()));
  const SessionSummary s = sessions.create_session(bytes, spec);
  ojson body{{"session_id", s.id},
             {"rows", s.n_rows},
             {"cols", s.n_cols},
             {"range", to_string(s.range)},
             {"revision", s.revision}};
  return make_response(req.version(), req.keep_alive(), http::status::created, body.dump());
}

Response handle_request(SessionManager& sessions, const Request& req) {
  try {
    if (req.method() == http::verb::options) {
      Response res = make_response(req.version(), req.keep_alive(), http::status::no_content, "");
      res.set(http::field::access_control_allow_methods, "GET, POST, DELETE, OPTIONS");
      res.set(http::field::access_control_allow_headers, "Content-Type");
      return res;
    }
    const Target t = parse_target(sv(req.target()));
    const auto& seg = t.segments;
    auto method_not_allowed = [&] {
      return make_response(req.version(), req.keep_alive(), http::status::method_not_allowed,
                           error_body("MethodNotAllowed", "method not allowed here"));
    };
    if (seg.size() == 1 && seg[0] == "sessions") {
      if (req.method() != http::verb::post) return method_not_allowed();
      return create_session(sessions, req, t);
    }
    if (seg.size() == 2 && seg[0] == "sessions") {
      if (req.method() == http::verb::delete_) {
        const auto saved = sessions.close(seg[1]);
        ojson body{{"closed", seg[1]},
                   {"saved_to", saved ? ojson(saved->string()) : ojson()}};
        return make_response(req.version(), req.keep_alive(), http::status::ok, body.dump());
      }
      if (req.method() == http::verb::get) {
        const SessionSummary s = sessions.summary(seg[1]);
        ojson body{{"session_id", s.id},
                   {"rows", s.n_rows},
                   {"cols", s.n_cols},
                   {"range", to_string(s.range)},
                   {"revision", s.revision}};
        return make_response(req.version(), req.keep_alive(), http::status::ok, body.dump());
      }
      return method_not_allowed();
    }
    if (seg.size() == 3 && seg[0] == "sessions" && seg[2] == "snapshot") {
      if (req.method() != http::verb::get) return method_not_allowed();
      return make_response(req.version(), req.keep_alive(), http::status::ok,
                           encode_message(sessions.get_snapshot(seg[1])));
    }
    if (seg.size() == 3 && seg[0] == "sessions" && seg[2] == "anomalies") {
      if (req.method() != http::verb::get) return method_not_allowed();
      const DetectorParams params = detector_params_from_fields(t.query);
      return make_response(req.version(), req.keep_alive(), http::status::ok,
                           write_report(sessions.anomalies(seg[1], params),
                                        ReportFormat::Document));
    }
    return make_response(req.version(), req.keep_alive(), http::status::not_found,
                         error_body("NotFound", "no route for " + std::string(req.target())));
  } catch (const std::exception& e) {
    const ErrorMessage err = error_message_for(e);
    return make_response(req.version(), req.keep_alive(), status_for(e),
                         error_body(err.code, err.detail));
  }
}

std::optional<std::string> sync_session_id(std::string_view target) {
  try {
    const Target t = parse_target(target);
    if (t.segments.size() == 3 && t.segments[0] == "sessions" && t.segments[2] == "sync") {
      return t.segments[1];
    }
  } catch (const BadMessage&) {
  }
  return std::nullopt;
}

class WsSession : public Subscriber, public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, SessionManager& sessions, std::string id)
      : ws_(std::move(socket)), sessions_(sessions), id_(std::move(id)) {}

  void run(Request req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(std::size_t{64} << 20);
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

  void deliver(const std::string& frame) override {
    net::post(ws_.get_executor(),
              [self = shared_from_this(), f = std::make_shared<const std::string>(frame)] {
                self->enqueue(f);
              });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    try {
      sessions_.subscribe(id_, shared_from_this());
      subscribed_ = true;
    } catch (const std::exception& e) {
      closing_ = true;
      deliver(encode_message(error_message_for(e)));
      return;
    }
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      if (subscribed_) sessions_.unsubscribe(id_, this);
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    handle(text);
    do_read();
  }

  void handle(const std::string& text) {
    try {
      std::visit(overloaded{
                     [&](const EditCell& m) { sessions_.handle_edit(id_, m); },
                     [&](const SelectCell& m) { sessions_.handle_select(id_, m); },
                     [&](const SelectGlyph& m) { sessions_.handle_select(id_, m); },
                     [&](const SnapshotRequest&) { sessions_.resend_snapshot(id_, *this); },
                     [](const auto&) {
                       throw BadMessage(
                           "clients may send edit, select_cell, select_glyph or snapshot");
                     },
                 },
                 decode_message(text));
    } catch (const std::exception& e) {
      deliver(encode_message(error_message_for(e)));
    }
  }

  void enqueue(std::shared_ptr<const std::string> frame) {
    queue_.push_back(std::move(frame));
    if (queue_.size() > 1) return;
    do_write();
  }

  void do_write() {
    ws_.text(true);
    ws_.async_write(net::buffer(*queue_.front()),
                    beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      if (subscribed_) sessions_.unsubscribe(id_, this);
      return;
    }
    queue_.pop_front();
    if (!queue_.empty()) {
      do_write();
    } else if (closing_) {
      ws_.async_close(websocket::close_code::policy_error,
                      [self = shared_from_this()](beast::error_code) {});
    }
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  SessionManager& sessions_;
  std::string id_;
  bool subscribed_ = false;
  bool closing_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, SessionManager& sessions, std::size_t body_limit)
      : stream_(std::move(socket)), sessions_(sessions), body_limit_(body_limit) {}

  void run() {
    net::dispatch(stream_.get_executor(),
                  beast::bind_front_handler(&HttpSession::do_read, shared_from_this()));
  }

 private:
  void do_read() {
    parser_.emplace();
    parser_->body_limit(body_limit_);
    stream_.expires_after(std::chrono::seconds(60));
    http::async_read(stream_, buffer_, *parser_,
                     beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::body_limit) {
      res_ = make_response(11, false, http::status::payload_too_large,
                           error_body("BadMessage", "request body too large"));
      return write();
    }
    if (ec) return do_close();
    Request req = parser_->release();
    if (websocket::is_upgrade(req)) {
      if (auto id = sync_session_id(sv(req.target()))) {
        stream_.expires_never();
        std::make_shared<WsSession>(stream_.release_socket(), sessions_, std::move(*id))
            ->run(std::move(req));
        return;
      }
      res_ = make_response(req.version(), false, http::status::not_found,
                           error_body("NotFound", "no websocket endpoint here"));
      return write();
    }
    res_ = handle_request(sessions_, req);
    write();
  }

  void write() {
    http::async_write(stream_, res_,
                      beast::bind_front_handler(&HttpSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) return;
    if (res_.need_eof()) return do_close();
    do_read();
  }

  void do_close() {
    beast::error_code ec;
    stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  std::optional<http::request_parser<http::string_body>> parser_;
  Response res_;
  SessionManager& sessions_;
  std::size_t body_limit_;
};

}  // namespace

struct Server::Impl {
  Impl(SessionManager& s, ServerOptions o) : sessions(s), options(std::move(o)) {}

  void do_accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (!acceptor.is_open()) return;
      if (!ec) {
        std::make_shared<HttpSession>(std::move(socket), sessions, options.body_limit)->run();
      }
      do_accept();
    });
  }

  SessionManager& sessions;
  ServerOptions options;
  net::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::optional<net::signal_set> signals;
  std::vector<std::thread> threads;
  std::mutex mutex;
};

Server::Server(SessionManager& sessions, ServerOptions options)
    : impl_(std::make_unique<Impl>(sessions, std::move(options))) {}

Server::~Server() {
  stop();
  wait();
}

unsigned short Server::start() {
  auto& d = *impl_;
  const tcp::endpoint endpoint{net::ip::make_address(d.options.address), d.options.port};
  d.acceptor.open(endpoint.protocol());
  d.acceptor.set_option(net::socket_base::reuse_address(true));
  d.acceptor.bind(endpoint);
  d.acceptor.listen(net::socket_base::max_listen_connections);
  d.do_accept();
  if (d.options.handle_signals) {
    d.signals.emplace(d.ioc, SIGINT, SIGTERM);
    d.signals->async_wait([this](beast::error_code ec, int) {
      if (!ec) stop();
    });
  }
  const std::size_t n = std::max<std::size_t>(1, d.options.threads);
  std::lock_guard lock(d.mutex);
  for (std::size_t i = 0; i < n; ++i) d.threads.emplace_back([&d] { d.ioc.run(); });
  return d.acceptor.local_endpoint().port();
}

void Server::wait() {
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(impl_->mutex);
    threads.swap(impl_->threads);
  }
  for (auto& t : threads) {
    if (t.get_id() == std::this_thread::get_id()) {
      t.detach();
    } else {
      t.join();
    }
  }
}

void Server::stop() {
  auto& d = *impl_;
  net::post(d.ioc, [&d] {
    beast::error_code ec;
    d.acceptor.close(ec);
    if (d.signals) d.signals->cancel(ec);
  });
  d.ioc.stop();
}

}  // namespace sheetscape
