#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace tw {

inline constexpr const char* kUnk = "<unk>";
inline constexpr const char* kBos = "<bos>";
inline constexpr const char* kEos = "<eos>";

inline constexpr int kMaxMessageTokens = 256;  // including <bos>/<eos>
inline constexpr int kMaxThreadMessages = 32;

struct Message {
  std::vector<std::string> tokens;
  std::map<std::string, std::string> raw_labels;  // task_id -> label string
  std::optional<std::string> speaker_id;
  std::optional<bool> has_attachment;
  std::optional<bool> is_thread_final;
};

struct Thread {
  std::string thread_id;
  std::string domain;
  std::vector<Message> messages;
};

struct TaskSpec {
  std::string task_id;
  std::string domain;
  std::vector<std::string> labels;  // fixed order; index = integer encoding
  bool auxiliary = false;           // parsed and validated but never trained

  // -1 if the label is not in the set.
  int label_index(const std::string& label) const;
};

class TaskRegistry {
 public:
  TaskRegistry() = default;
  explicit TaskRegistry(std::vector<TaskSpec> tasks);

  static TaskRegistry load(const std::string& path);
  void save(const std::string& path) const;

  const std::vector<TaskSpec>& tasks() const { return tasks_; }
  const TaskSpec* find(const std::string& task_id) const;
  const TaskSpec& require(const std::string& task_id) const;
  std::vector<const TaskSpec*> tasks_of_domain(const std::string& domain) const;
  const std::set<std::string>& domains() const { return domains_; }

 private:
  std::vector<TaskSpec> tasks_;
  std::set<std::string> domains_;
};

struct CorpusSplits {
  std::vector<Thread> train;
  std::vector<Thread> valid;
  std::vector<Thread> test;

  const std::vector<Thread>& split(const std::string& name) const;
  std::vector<const Thread*> threads_of(const std::string& split, const std::string& domain) const;
  std::size_t count(const std::string& split, const std::string& domain) const;
};

// The nine recipient actions plus the catch-all Other.
enum class ActionLabel {
  ReplyYesno,
  ReplyAck,
  ReplyOther,
  Investigate,
  SendNewEmail,
  SetupAppointment,
  ApproveRequest,
  ShareContent,
  Other,
};
inline constexpr int kNumActionLabels = 9;

const char* to_string(ActionLabel a);
ActionLabel parse_action_label(const std::string& s);

// --- preprocessing -------------------------------------------------------

// Wraps tokens with <bos>/<eos> if not already wrapped and truncates to the
// first 254 content tokens. Idempotent.
void preprocess_message(Message& m);

// Message preprocessing plus truncation to the earliest 32 messages.
void preprocess_thread(Thread& t);

// --- operations ----------------------------------------------------------

// Writes binary labels for the registry's metadata tasks (E-T, E-A, I-T, R-T)
// of the thread's domain. End-of-thread labels prefer the is_thread_final
// flag when any message carries it, otherwise the last message gets the 1.
void derive_metadata_labels(Thread& thread, const TaskRegistry& registry);

// Parses thread-per-line JSONL, validates against the registry, derives
// metadata labels on the full record, preprocesses, and assigns splits by
// seeded hash rank of thread_id per domain (1/2, 1/4, 1/4 within +-1 thread).
CorpusSplits load_corpus(const std::string& path, const TaskRegistry& registry,
                         std::uint64_t split_seed = 0);

// Same split assignment for an in-memory thread list (threads must already be
// validated/preprocessed).
CorpusSplits assign_splits(std::vector<Thread> threads, std::uint64_t split_seed);

// One JSONL line per thread in the documented ingestion format. Specials are
// stripped from token lists so write -> load round-trips.
std::string thread_to_jsonl(const Thread& t);
void write_corpus_jsonl(const std::string& path, std::span<const Thread> threads);

struct Vocabulary {
  std::vector<std::string> tokens;  // [<unk>, <bos>, <eos>, content...]
  std::unordered_map<std::string, int> index;

  int id(const std::string& token) const {
    auto it = index.find(token);
    return it == index.end() ? 0 : it->second;
  }
  int size() const { return static_cast<int>(tokens.size()); }
};

// Frequency >= min_count tokens from the train split, ordered by frequency
// desc then lexicographic, after the three specials.
Vocabulary build_vocabulary(std::span<const Thread> train_threads, int min_count = 2);

// (p_o - p_e) / (1 - p_e); returns 1 when both sequences are identical and
// chance agreement is total.
double cohens_kappa(std::span<const int> labels_a, std::span<const int> labels_b);
double cohens_kappa(std::span<const std::string> a, std::span<const std::string> b);
double cohens_kappa(std::span<const ActionLabel> a, std::span<const ActionLabel> b);

// Seeded FNV-1a over the thread id; drives split assignment.
std::uint64_t split_hash(std::uint64_t seed, const std::string& thread_id);

}  // namespace tw
