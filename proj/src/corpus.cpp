#include "threadweave/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "threadweave/errors.hpp"

using nlohmann::json;

namespace tw {

int TaskSpec::label_index(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return static_cast<int>(i);
  return -1;
}

TaskRegistry::TaskRegistry(std::vector<TaskSpec> tasks) : tasks_(std::move(tasks)) {
  std::set<std::string> seen;
  for (const TaskSpec& t : tasks_) {
    if (!seen.insert(t.task_id).second)
      throw DataError("task registry: duplicate task_id '" + t.task_id + "'");
    if (t.labels.size() < 2)
      throw DataError("task '" + t.task_id + "': label set needs at least 2 labels");
    std::set<std::string> labels(t.labels.begin(), t.labels.end());
    if (labels.size() != t.labels.size())
      throw DataError("task '" + t.task_id + "': duplicate labels");
    domains_.insert(t.domain);
  }
}

TaskRegistry TaskRegistry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open task registry: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError("task registry " + path + ": " + e.what());
  }
  if (!doc.is_array()) throw DataError("task registry " + path + ": expected a JSON list");
  std::vector<TaskSpec> tasks;
  for (const auto& item : doc) {
    TaskSpec t;
    try {
      t.task_id = item.at("task_id").get<std::string>();
      t.domain = item.at("domain").get<std::string>();
      t.labels = item.at("labels").get<std::vector<std::string>>();
      t.auxiliary = item.value("auxiliary", false);
    } catch (const json::exception& e) {
      throw DataError("task registry " + path + ": " + e.what());
    }
    tasks.push_back(std::move(t));
  }
  return TaskRegistry(std::move(tasks));
}

void TaskRegistry::save(const std::string& path) const {
  json doc = json::array();
  for (const TaskSpec& t : tasks_) {
    json item{{"task_id", t.task_id}, {"domain", t.domain}, {"labels", t.labels}};
    if (t.auxiliary) item["auxiliary"] = true;
    doc.push_back(item);
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write task registry: " + path);
  out << doc.dump(2) << "\n";
}

const TaskSpec* TaskRegistry::find(const std::string& task_id) const {
  for (const TaskSpec& t : tasks_)
    if (t.task_id == task_id) return &t;
  return nullptr;
}

const TaskSpec& TaskRegistry::require(const std::string& task_id) const {
  const TaskSpec* t = find(task_id);
  if (!t) throw DataError("unknown task '" + task_id + "'");
  return *t;
}

std::vector<const TaskSpec*> TaskRegistry::tasks_of_domain(const std::string& domain) const {
  std::vector<const TaskSpec*> out;
  for (const TaskSpec& t : tasks_)
    if (t.domain == domain) out.push_back(&t);
  return out;
}

const std::vector<Thread>& CorpusSplits::split(const std::string& name) const {
  if (name == "train") return train;
  if (name == "valid") return valid;
  if (name == "test") return test;
  throw UsageError("unknown split '" + name + "' (expected train|valid|test)");
}

std::vector<const Thread*> CorpusSplits::threads_of(const std::string& split_name,
                                                    const std::string& domain) const {
  std::vector<const Thread*> out;
  for (const Thread& t : split(split_name))
    if (t.domain == domain) out.push_back(&t);
  return out;
}

std::size_t CorpusSplits::count(const std::string& split_name, const std::string& domain) const {
  std::size_t n = 0;
  for (const Thread& t : split(split_name))
    if (t.domain == domain) ++n;
  return n;
}

namespace {
constexpr const char* kActionNames[kNumActionLabels] = {
    "Reply-Yesno",   "Reply-Ack",         "Reply-Other",     "Investigate", "Send-New-Email",
    "Setup-Appointment", "Approve-Request", "Share-Content", "Other"};
}

const char* to_string(ActionLabel a) { return kActionNames[static_cast<int>(a)]; }

ActionLabel parse_action_label(const std::string& s) {
  for (int i = 0; i < kNumActionLabels; ++i)
    if (s == kActionNames[i]) return static_cast<ActionLabel>(i);
  throw DataError("unknown recipient action '" + s + "'");
}

void preprocess_message(Message& m) {
  std::vector<std::string>& t = m.tokens;
  const bool wrapped = t.size() >= 2 && t.front() == kBos && t.back() == kEos;
  std::vector<std::string> content;
  if (wrapped)
    content.assign(t.begin() + 1, t.end() - 1);
  else
    content = t;
  if (content.size() > kMaxMessageTokens - 2) content.resize(kMaxMessageTokens - 2);
  t.clear();
  t.reserve(content.size() + 2);
  t.push_back(kBos);
  for (auto& c : content) t.push_back(std::move(c));
  t.push_back(kEos);
}

void preprocess_thread(Thread& thread) {
  if (thread.messages.size() > static_cast<std::size_t>(kMaxThreadMessages))
    thread.messages.resize(kMaxThreadMessages);
  for (Message& m : thread.messages) preprocess_message(m);
}

void derive_metadata_labels(Thread& thread, const TaskRegistry& registry) {
  const auto tasks = registry.tasks_of_domain(thread.domain);
  bool any_final_flag = false;
  for (const Message& m : thread.messages)
    if (m.is_thread_final.has_value()) any_final_flag = true;

  auto is_final = [&](std::size_t i) {
    if (any_final_flag) return thread.messages[i].is_thread_final.value_or(false);
    return i + 1 == thread.messages.size();
  };

  for (const TaskSpec* task : tasks) {
    const std::string& id = task->task_id;
    if (id != "E-T" && id != "E-A" && id != "I-T" && id != "R-T") continue;
    for (std::size_t i = 0; i < thread.messages.size(); ++i) {
      Message& m = thread.messages[i];
      std::string label;
      if (id == "E-T" || id == "R-T") {
        label = is_final(i) ? "1" : "0";
      } else if (id == "E-A") {
        if (!m.has_attachment.has_value())
          throw DataError("thread '" + thread.thread_id + "' message " + std::to_string(i + 1) +
                          ": task E-A requires meta field has_attachment");
        label = *m.has_attachment ? "1" : "0";
      } else {  // I-T: speaker changed vs previous message; first message is 0
        if (!m.speaker_id.has_value())
          throw DataError("thread '" + thread.thread_id + "' message " + std::to_string(i + 1) +
                          ": task I-T requires meta field speaker_id");
        if (i == 0)
          label = "0";
        else
          label = (*m.speaker_id != *thread.messages[i - 1].speaker_id) ? "1" : "0";
      }
      m.raw_labels[id] = label;
    }
  }
}

std::uint64_t split_hash(std::uint64_t seed, const std::string& thread_id) {
  std::uint64_t x = seed;
  std::uint64_t h = 0xcbf29ce484222325ULL ^ Rng::splitmix64(x);
  for (unsigned char c : thread_id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

Message parse_message(const json& jm, const std::string& ctx) {
  Message m;
  if (!jm.is_object()) throw DataError(ctx + ": message must be an object");
  if (!jm.contains("tokens") || !jm.at("tokens").is_array())
    throw DataError(ctx + ": message missing \"tokens\" array");
  for (const auto& tok : jm.at("tokens")) {
    if (!tok.is_string()) throw DataError(ctx + ": tokens must be strings");
    m.tokens.push_back(tok.get<std::string>());
  }
  {
    // Wrapped-only content does not count; an effectively empty message is
    // an ingestion error, never an encoder case.
    std::size_t content = m.tokens.size();
    if (content >= 2 && m.tokens.front() == kBos && m.tokens.back() == kEos) content -= 2;
    if (content == 0) throw DataError(ctx + ": message has no content tokens");
  }
  if (jm.contains("labels")) {
    if (!jm.at("labels").is_object()) throw DataError(ctx + ": \"labels\" must be an object");
    for (const auto& [task_id, label] : jm.at("labels").items()) {
      if (!label.is_string()) throw DataError(ctx + ": label values must be strings");
      m.raw_labels[task_id] = label.get<std::string>();
    }
  }
  if (jm.contains("meta")) {
    const json& meta = jm.at("meta");
    if (!meta.is_object()) throw DataError(ctx + ": \"meta\" must be an object");
    if (meta.contains("speaker_id")) m.speaker_id = meta.at("speaker_id").get<std::string>();
    if (meta.contains("has_attachment")) m.has_attachment = meta.at("has_attachment").get<bool>();
    if (meta.contains("is_thread_final"))
      m.is_thread_final = meta.at("is_thread_final").get<bool>();
  }
  return m;
}

void validate_thread_labels(const Thread& t, const TaskRegistry& registry, const std::string& ctx) {
  for (std::size_t i = 0; i < t.messages.size(); ++i) {
    for (const auto& [task_id, label] : t.messages[i].raw_labels) {
      const TaskSpec* task = registry.find(task_id);
      if (!task) throw DataError(ctx + ": unknown task identifier '" + task_id + "'");
      if (task->domain != t.domain)
        throw DataError(ctx + ": task '" + task_id + "' belongs to domain '" + task->domain +
                        "', thread is in '" + t.domain + "'");
      if (task->label_index(label) < 0)
        throw DataError(ctx + ": message " + std::to_string(i + 1) + " label '" + label +
                        "' is outside the label set of task '" + task_id + "'");
    }
  }
}

}  // namespace

CorpusSplits assign_splits(std::vector<Thread> threads, std::uint64_t split_seed) {
  // Rank per domain by seeded hash; quotas give exact 1/2, 1/4, 1/4 within
  // rounding while staying stable under record reordering.
  std::map<std::string, std::vector<std::size_t>> by_domain;
  for (std::size_t i = 0; i < threads.size(); ++i) by_domain[threads[i].domain].push_back(i);

  CorpusSplits out;
  for (auto& [domain, idxs] : by_domain) {
    std::sort(idxs.begin(), idxs.end(), [&](std::size_t a, std::size_t b) {
      const std::uint64_t ha = split_hash(split_seed, threads[a].thread_id);
      const std::uint64_t hb = split_hash(split_seed, threads[b].thread_id);
      if (ha != hb) return ha < hb;
      return threads[a].thread_id < threads[b].thread_id;
    });
    const std::size_t n = idxs.size();
    const std::size_t n_train = static_cast<std::size_t>(std::llround(n * 0.5));
    const std::size_t n_valid =
        std::min(n - n_train, static_cast<std::size_t>(std::llround(n * 0.25)));
    for (std::size_t r = 0; r < n; ++r) {
      Thread& t = threads[idxs[r]];
      if (r < n_train)
        out.train.push_back(std::move(t));
      else if (r < n_train + n_valid)
        out.valid.push_back(std::move(t));
      else
        out.test.push_back(std::move(t));
    }
  }
  auto by_key = [](const Thread& a, const Thread& b) {
    if (a.domain != b.domain) return a.domain < b.domain;
    return a.thread_id < b.thread_id;
  };
  std::sort(out.train.begin(), out.train.end(), by_key);
  std::sort(out.valid.begin(), out.valid.end(), by_key);
  std::sort(out.test.begin(), out.test.end(), by_key);
  return out;
}

CorpusSplits load_corpus(const std::string& path, const TaskRegistry& registry,
                         std::uint64_t split_seed) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus: " + path);

  std::vector<Thread> threads;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string ctx = path + ":" + std::to_string(line_no);
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(ctx + ": malformed record: " + e.what());
    }
    if (!doc.is_object()) throw DataError(ctx + ": malformed record: expected an object");
    Thread t;
    try {
      t.thread_id = doc.at("thread_id").get<std::string>();
      t.domain = doc.at("domain").get<std::string>();
    } catch (const json::exception& e) {
      throw DataError(ctx + ": malformed record: " + e.what());
    }
    if (!doc.contains("messages") || !doc.at("messages").is_array() || doc.at("messages").empty())
      throw DataError(ctx + ": malformed record: empty or missing \"messages\"");
    if (!registry.domains().count(t.domain))
      throw DataError(ctx + ": unknown domain '" + t.domain + "'");
    if (!seen_ids.insert(t.thread_id).second)
      throw DataError(ctx + ": malformed record: duplicate thread_id '" + t.thread_id + "'");
    for (const auto& jm : doc.at("messages")) t.messages.push_back(parse_message(jm, ctx));

    validate_thread_labels(t, registry, ctx);
    // Derive on the complete record, then truncate: a cut-off thread keeps
    // all-zero end-of-thread labels rather than a fabricated final marker.
    derive_metadata_labels(t, registry);
    preprocess_thread(t);
    threads.push_back(std::move(t));
  }
  return assign_splits(std::move(threads), split_seed);
}

std::string thread_to_jsonl(const Thread& t) {
  json messages = json::array();
  for (const Message& m : t.messages) {
    json jm;
    std::vector<std::string> content = m.tokens;
    if (content.size() >= 2 && content.front() == kBos && content.back() == kEos)
      content = std::vector<std::string>(content.begin() + 1, content.end() - 1);
    jm["tokens"] = content;
    jm["labels"] = json::object();
    for (const auto& [task, label] : m.raw_labels) jm["labels"][task] = label;
    json meta = json::object();
    if (m.speaker_id) meta["speaker_id"] = *m.speaker_id;
    if (m.has_attachment) meta["has_attachment"] = *m.has_attachment;
    if (m.is_thread_final) meta["is_thread_final"] = *m.is_thread_final;
    if (!meta.empty()) jm["meta"] = meta;
    messages.push_back(jm);
  }
  json doc{{"thread_id", t.thread_id}, {"domain", t.domain}, {"messages", messages}};
  return doc.dump();
}

void write_corpus_jsonl(const std::string& path, std::span<const Thread> threads) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus: " + path);
  for (const Thread& t : threads) out << thread_to_jsonl(t) << "\n";
}

Vocabulary build_vocabulary(std::span<const Thread> train_threads, int min_count) {
  if (min_count < 1) throw UsageError("build_vocabulary: min_count must be >= 1");
  if (train_threads.empty()) throw DataError("build_vocabulary: empty training set");
  std::map<std::string, long> counts;
  for (const Thread& t : train_threads)
    for (const Message& m : t.messages)
      for (const std::string& tok : m.tokens) {
        if (tok == kUnk || tok == kBos || tok == kEos) continue;
        ++counts[tok];
      }
  std::vector<std::pair<std::string, long>> kept;
  for (auto& [tok, c] : counts)
    if (c >= min_count) kept.emplace_back(tok, c);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  v.tokens = {kUnk, kBos, kEos};
  for (auto& [tok, c] : kept) v.tokens.push_back(tok);
  for (std::size_t i = 0; i < v.tokens.size(); ++i) v.index.emplace(v.tokens[i], static_cast<int>(i));
  return v;
}

double cohens_kappa(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw DataError("cohens_kappa: length mismatch");
  if (a.empty()) throw DataError("cohens_kappa: empty input");
  const double n = static_cast<double>(a.size());
  std::map<int, double> ma, mb;
  double agree = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma[a[i]] += 1.0;
    mb[b[i]] += 1.0;
    if (a[i] == b[i]) agree += 1.0;
  }
  const double po = agree / n;
  double pe = 0.0;
  for (const auto& [label, ca] : ma) {
    auto it = mb.find(label);
    if (it != mb.end()) pe += (ca / n) * (it->second / n);
  }
  if (pe >= 1.0) return 1.0;  // both marginals on one shared label => po == 1
  return (po - pe) / (1.0 - pe);
}

namespace {
template <typename T>
double kappa_generic(std::span<const T> a, std::span<const T> b) {
  std::map<T, int> codes;
  auto code = [&](const T& x) {
    auto it = codes.find(x);
    if (it != codes.end()) return it->second;
    const int c = static_cast<int>(codes.size());
    codes.emplace(x, c);
    return c;
  };
  std::vector<int> ia, ib;
  for (const T& x : a) ia.push_back(code(x));
  for (const T& x : b) ib.push_back(code(x));
  return cohens_kappa(std::span<const int>(ia), std::span<const int>(ib));
}
}  // namespace

double cohens_kappa(std::span<const std::string> a, std::span<const std::string> b) {
  return kappa_generic(a, b);
}

double cohens_kappa(std::span<const ActionLabel> a, std::span<const ActionLabel> b) {
  return kappa_generic(a, b);
}

}  // namespace tw
