#include "pprl/datagen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>
#include <string_view>

namespace pprl {

namespace {

constexpr std::string_view kLetters = "abcdefghijklmnopqrstuvwxyz";
constexpr std::string_view kDigits = "0123456789";

// All sampling goes through these two helpers so generation is reproducible
// independent of the standard library's distribution internals.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

double unit_real(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

template <typename T>
void shuffle_vec(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[bounded(rng, i)]);
}

// Cumulative weights for inverse-CDF sampling.
std::vector<double> cdf_from_weights(const std::vector<double>& weights) {
  std::vector<double> cdf(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0)) throw std::invalid_argument("weights must be positive");
    total += weights[i];
    cdf[i] = total;
  }
  for (double& c : cdf) c /= total;
  return cdf;
}

std::vector<double> rank_weights(std::size_t n, double exponent) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::pow(double(i + 1), exponent);
  return w;
}

std::size_t sample(const std::vector<double>& cdf, std::mt19937_64& rng) {
  double u = unit_real(rng);
  return std::size_t(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
}

using PersonTuple = std::array<std::string, 4>;

std::string tuple_key(const PersonTuple& t) {
  std::string key;
  for (const auto& v : t) {
    key += v;
    key.push_back('\x1f');
  }
  return key;
}

bool edit_applicable(const std::string& value, EditOp op) {
  switch (op) {
    case EditOp::insert:
      return true;
    case EditOp::erase:
    case EditOp::substitute:
      return !value.empty();
    case EditOp::transpose:
      for (std::size_t i = 0; i + 1 < value.size(); ++i)
        if (value[i] != value[i + 1]) return true;
      return false;
  }
  return false;
}

}  // namespace

std::string apply_edit(const std::string& value, EditOp op, std::mt19937_64& rng,
                       std::string_view alphabet) {
  if (alphabet.size() < 2) throw std::invalid_argument("apply_edit: alphabet too small");
  if (!edit_applicable(value, op)) throw std::invalid_argument("apply_edit: operation not applicable");

  std::string out = value;
  switch (op) {
    case EditOp::insert: {
      std::size_t pos = bounded(rng, out.size() + 1);
      out.insert(out.begin() + pos, alphabet[bounded(rng, alphabet.size())]);
      break;
    }
    case EditOp::erase: {
      out.erase(out.begin() + bounded(rng, out.size()));
      break;
    }
    case EditOp::substitute: {
      std::size_t pos = bounded(rng, out.size());
      char ch;
      do {
        ch = alphabet[bounded(rng, alphabet.size())];
      } while (ch == out[pos]);
      out[pos] = ch;
      break;
    }
    case EditOp::transpose: {
      std::vector<std::size_t> spots;
      for (std::size_t i = 0; i + 1 < out.size(); ++i)
        if (out[i] != out[i + 1]) spots.push_back(i);
      std::size_t pos = spots[bounded(rng, spots.size())];
      std::swap(out[pos], out[pos + 1]);
      break;
    }
  }
  return out;
}

std::string corrupt_value(const std::string& value, std::size_t n_ops, std::mt19937_64& rng,
                          std::string_view alphabet) {
  if (n_ops == 0) throw std::invalid_argument("corrupt_value: need at least one operation");
  std::string out;
  do {
    out = value;
    for (std::size_t i = 0; i < n_ops; ++i) {
      EditOp op;
      do {
        op = EditOp(bounded(rng, 4));
      } while (!edit_applicable(out, op));
      out = apply_edit(out, op, rng, alphabet);
    }
  } while (out == value);  // ops can cancel out; redraw the whole sequence
  return out;
}

void GenSpec::validate() const {
  if (parties < 3 || parties > 26)
    throw std::invalid_argument("gen: parties must be between 3 and 26");
  if (records_per_party < 1) throw std::invalid_argument("gen: need at least one record");
  if (!(overlap >= 0.0 && overlap <= 1.0))
    throw std::invalid_argument("gen: overlap fraction out of range");
  if (!(corruption >= 0.0 && corruption <= 1.0))
    throw std::invalid_argument("gen: corruption fraction out of range");
  if (min_ops < 1 || min_ops > max_ops)
    throw std::invalid_argument("gen: bad edit operation range");
  if (!surname_weights.empty() && !surnames.empty() &&
      surname_weights.size() != surnames.size())
    throw std::invalid_argument("gen: surname weight count differs from pool size");
}

GeneratedData generate(const GenSpec& spec) {
  spec.validate();

  const auto& givens = spec.given_names.empty() ? builtin_given_names() : spec.given_names;
  const auto& surnames = spec.surnames.empty() ? builtin_surnames() : spec.surnames;
  const auto& suburbs = spec.suburbs.empty() ? builtin_suburbs() : spec.suburbs;
  const auto& postcodes = spec.postcodes.empty() ? builtin_postcodes() : spec.postcodes;
  std::vector<double> surname_weights =
      spec.surnames.empty() && spec.surname_weights.empty()
          ? builtin_surname_weights()
          : (spec.surname_weights.empty() ? rank_weights(surnames.size(), 0.0)
                                          : spec.surname_weights);
  if (surname_weights.size() != surnames.size())
    throw std::invalid_argument("gen: surname weight count differs from pool size");
  if (givens.empty() || surnames.empty() || suburbs.empty() || postcodes.empty())
    throw std::invalid_argument("gen: empty value pool");

  const std::size_t P = spec.parties;
  const std::size_t N = spec.records_per_party;
  const std::size_t overlap_count = std::size_t(std::llround(spec.overlap * double(N)));
  const std::size_t unique_per_party = N - overlap_count;
  const std::size_t total_entities = overlap_count + P * unique_per_party;

  const double capacity = double(givens.size()) * double(surnames.size()) *
                          double(suburbs.size()) * double(postcodes.size());
  if (double(total_entities) > capacity / 2.0)
    throw std::invalid_argument("gen: lexicons cannot supply enough distinct person tuples");

  std::mt19937_64 rng(spec.seed);
  const auto given_cdf = cdf_from_weights(rank_weights(givens.size(), 0.3));
  const auto surname_cdf = cdf_from_weights(surname_weights);
  const auto suburb_cdf = cdf_from_weights(rank_weights(suburbs.size(), 0.3));
  const auto postcode_cdf = cdf_from_weights(rank_weights(postcodes.size(), 0.3));

  std::set<std::string> used;
  auto draw_entity = [&] {
    PersonTuple t;
    do {
      t = {givens[sample(given_cdf, rng)], surnames[sample(surname_cdf, rng)],
           suburbs[sample(suburb_cdf, rng)], postcodes[sample(postcode_cdf, rng)]};
    } while (!used.insert(tuple_key(t)).second);
    return t;
  };

  std::vector<PersonTuple> entities(total_entities);
  for (auto& e : entities) e = draw_entity();

  // Which overlap entities get corrupted, and at which parties.
  const std::size_t corrupted_count =
      std::size_t(std::llround(spec.corruption * double(overlap_count)));
  std::vector<std::size_t> overlap_order(overlap_count);
  for (std::size_t i = 0; i < overlap_count; ++i) overlap_order[i] = i;
  shuffle_vec(overlap_order, rng);

  auto corrupt_entity = [&](const PersonTuple& original) {
    PersonTuple variant;
    do {
      variant = original;
      std::size_t ops = spec.min_ops + bounded(rng, spec.max_ops - spec.min_ops + 1);
      for (std::size_t i = 0; i < ops; ++i) {
        std::size_t attr = bounded(rng, 4);
        std::string_view alphabet = attr == 3 ? kDigits : kLetters;
        std::string& value = variant[attr];
        EditOp op;
        do {
          op = EditOp(bounded(rng, 4));
        } while (!edit_applicable(value, op));
        value = apply_edit(value, op, rng, alphabet);
      }
    } while (!used.insert(tuple_key(variant)).second);
    return variant;
  };

  // holds[e][p]: the tuple party p+1 stores for overlap entity e.
  std::vector<std::vector<const PersonTuple*>> holds(overlap_count,
                                                     std::vector<const PersonTuple*>(P));
  for (std::size_t e = 0; e < overlap_count; ++e)
    for (std::size_t p = 0; p < P; ++p) holds[e][p] = &entities[e];

  std::deque<PersonTuple> variants;  // deque keeps earlier pointers valid
  for (std::size_t c = 0; c < corrupted_count; ++c) {
    const std::size_t e = overlap_order[c];
    // non-empty proper subset of parties receives a corrupted variant
    const std::uint64_t mask = 1 + bounded(rng, (std::uint64_t(1) << P) - 2);
    for (std::size_t p = 0; p < P; ++p) {
      if (!(mask >> p & 1)) continue;
      variants.push_back(corrupt_entity(entities[e]));
      holds[e][p] = &variants.back();
    }
  }

  GeneratedData out;
  out.truth.parties = P;
  out.truth.tuples.assign(overlap_count, std::vector<std::string>(P));

  std::size_t next_unique = overlap_count;
  for (std::size_t p = 0; p < P; ++p) {
    // row payloads first, then a shuffle, then rids in final row order
    std::vector<std::pair<const PersonTuple*, std::size_t>> rows;  // tuple, entity
    rows.reserve(N);
    for (std::size_t e = 0; e < overlap_count; ++e) rows.emplace_back(holds[e][p], e);
    for (std::size_t u = 0; u < unique_per_party; ++u, ++next_unique)
      rows.emplace_back(&entities[next_unique], SIZE_MAX);
    shuffle_vec(rows, rng);

    Database db;
    db.attributes = {"given_name", "surname", "suburb", "postcode"};
    db.rows.reserve(N);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::string rid = std::string(1, char('A' + p)) + std::to_string(i + 1);
      const PersonTuple& t = *rows[i].first;
      db.rows.push_back({rid, {t[0], t[1], t[2], t[3]}});
      if (rows[i].second != SIZE_MAX) out.truth.tuples[rows[i].second][p] = rid;
    }
    out.parties.push_back(std::move(db));
  }
  return out;
}

namespace {

std::vector<std::string> make_given_names() {
  return {
      "aaron", "abigail", "adrian", "albert", "alice", "amber", "andrew", "angela",
      "anthony", "arthur", "barbara", "barry", "beatrice", "benjamin", "bernard",
      "beverley", "bradley", "brendan", "brian", "bruce", "caitlin", "cameron",
      "carol", "catherine", "cedric", "charles", "charlotte", "christine", "clarence",
      "claude", "colin", "conrad", "craig", "crystal", "cynthia", "damien", "daniel",
      "daphne", "darren", "david", "deborah", "dennis", "derek", "desmond", "diane",
      "dominic", "donald", "dorothy", "douglas", "duncan", "edgar", "edith", "edmund",
      "eleanor", "elizabeth", "emily", "eric", "ernest", "eugene", "evelyn", "felix",
      "fiona", "florence", "francis", "frederick", "gabriel", "geoffrey", "gerald",
      "gilbert", "gladys", "gordon", "graham", "gregory", "gwendolyn", "harold",
      "harriet", "hayden", "heather", "hector", "helen", "herbert", "horace",
      "howard", "hugh", "ingrid", "irene", "isaac", "isabel", "jacob", "janet",
      "jasmine", "jeffrey", "jennifer", "jerome", "jessica", "joan", "jonathan",
      "joseph", "joyce", "judith", "julian", "justin", "karen", "kathleen",
      "kenneth", "kevin", "kirsten", "kylie", "lambert", "laura", "lawrence",
      "leonard", "lesley", "lillian", "linda", "lloyd", "lorraine", "lucas",
      "lydia", "malcolm", "margaret", "marjorie", "martin", "matthew", "maurice",
      "maxwell", "melissa", "mervyn", "michael", "mildred", "miranda", "monica",
      "muriel", "nancy", "natasha", "neville", "nicholas", "nigel", "noel",
      "norman", "oliver", "oscar", "oswald", "pamela", "patricia", "pauline",
      "peter", "philip", "priscilla", "quentin", "rachel", "raymond", "rebecca",
      "reginald", "rhonda", "richard", "robert", "rodney", "roger", "rosemary",
      "russell", "ruth", "samuel", "sandra", "sharon", "sheila", "shirley",
      "stanley", "stella", "stephen", "stuart", "susan", "sylvia", "terence",
      "theodore", "thomas", "timothy", "trevor", "ursula", "valerie", "vernon",
      "victor", "vincent", "virginia", "walter", "wendy", "wesley", "william",
      "winifred", "yvonne", "zachary"};
}

// Short locality names keep the suburb's share of a record's grams small, so
// two different people from the same town still look different.
std::vector<std::string> make_suburbs() {
  return {
      "perth", "cairns", "dubbo", "bega", "yass", "moree", "casino", "cobar",
      "bourke", "orange", "parkes", "mudgee", "leeton", "albury", "cowra",
      "forbes", "taree", "kempsey", "grafton", "lismore", "ballina", "glebe",
      "manly", "bondi", "coogee", "penrith", "hornsby", "epping", "gosford",
      "wyong", "tumut", "junee", "hendra", "aspley", "kedron", "nundah",
      "seaford", "geelong", "bendigo", "mildura", "echuca", "horsham", "colac",
      "ararat", "stawell", "burnie", "hobart", "sorell", "cygnet", "glenelg",
      "norwood", "unley", "mawson", "gawler", "tanunda", "berri", "loxton",
      "renmark", "whyalla", "kadina", "burra", "quorn", "hawker", "ceduna",
      "penola", "subiaco", "broome", "albany", "moora", "darwin", "jabiru",
      "northam", "toodyay", "dongara", "wagga", "mackay", "bowen", "ingham",
      "tully", "gympie"};
}

// Head tier: families of very common surnames. Each family is one root plus
// four alternative spellings that differ only in one vowel, so the whole
// family lands in a single busy phonetic block while exact string repeats
// stay rare. Tail tier: generated surnames whose distinct leading consonant
// structure spreads the rest of the records across many small blocks.
constexpr std::size_t kSurnameRoots = 95;
constexpr std::size_t kSurnameVariants = 5;
constexpr std::size_t kSurnameHead = kSurnameRoots * kSurnameVariants;
constexpr double kSurnameHeadWeight = 0.32;

// Respellings that keep the phonetic code: swap the last a/e/i/o/u past the
// first letter for each vowel in turn (the original spelling is one of them).
std::vector<std::string> vowel_respellings(const std::string& root) {
  static const char vowels[] = {'a', 'e', 'i', 'o', 'u'};
  std::size_t pos = std::string::npos;
  for (std::size_t i = root.size(); i-- > 1;) {
    char c = root[i];
    if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') {
      pos = i;
      break;
    }
  }
  if (pos == std::string::npos)
    throw std::logic_error("surname root has no replaceable vowel: " + root);
  std::vector<std::string> out;
  for (char v : vowels) {
    std::string s = root;
    s[pos] = v;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> make_surnames() {
  static const char* roots[] = {
      "king", "reid", "shaw", "west", "gray", "hunt", "hart", "dean",
      "cole", "page", "lane", "carr", "ford", "webb", "bird", "lamb",
      "todd", "nash", "bond", "kerr", "lowe", "dale", "holt", "bush",
      "wood", "bell", "cook", "hall", "moss", "khan", "ward", "drew",
      "gill", "mann", "chan", "wong", "tran", "ross", "sims", "kemp",
      "lang", "hope", "nunn", "york", "neal", "fox", "penn", "duke",
      "vane", "kite", "jones", "brown", "green", "stone", "marsh", "booth",
      "smith", "scott", "perry", "kelly", "lewis", "mason", "baker", "brock",
      "stark", "frost", "crane", "grant", "hayes", "kirby", "meyer", "noble",
      "olsen", "pratt", "riley", "stout", "swift", "tracy", "vance", "walsh",
      "yates", "drake", "slade", "crisp", "brand", "blake", "clegg", "gibbs",
      "hobbs", "knott", "nixon", "owens", "young", "quinn", "floyd"};
  static_assert(sizeof(roots) / sizeof(roots[0]) == kSurnameRoots);

  std::vector<std::string> names;
  for (const char* root : roots)
    for (auto& v : vowel_respellings(root)) names.push_back(std::move(v));

  static const char* onsets[] = {"b",  "br", "c",  "cl", "cr", "d",  "dr", "f",
                                 "fl", "g",  "gr", "h",  "j",  "k",  "l",  "m",
                                 "n",  "p",  "pr", "r",  "s",  "sk", "st", "t",
                                 "tr", "v",  "w",  "wh", "y",  "z"};
  static const char* mids[] = {"ad", "al",  "am",  "an", "ar", "ast", "eck", "ed",
                               "el", "em",  "en",  "ib", "id", "il",  "im",  "in",
                               "ob", "ock", "od",  "ol", "om", "on",  "or",  "ub",
                               "uck", "ud", "ul",  "um", "un", "ur",  "ust", "ay"};
  static const char* suffixes[] = {"er", "son", "ton", "man", "by", "den", "ley"};

  for (std::size_t i = 0; i < 30 * 32; ++i) {
    std::string name = std::string(onsets[i % 30]) + mids[(i / 30) % 32] + suffixes[i % 7];
    names.push_back(std::move(name));
  }
  return names;
}

std::vector<double> make_surname_weights(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = i < kSurnameHead ? kSurnameHeadWeight / double(kSurnameHead)
                            : (1.0 - kSurnameHeadWeight) / double(n - kSurnameHead);
  return w;
}

std::vector<std::string> make_postcodes() {
  // 173 is coprime to 9000, so the first 400 multiples are distinct mod 9000.
  std::vector<std::string> out;
  for (std::size_t i = 0; i < 400; ++i) out.push_back(std::to_string(1000 + i * 173 % 9000));
  return out;
}

}  // namespace

const std::vector<std::string>& builtin_given_names() {
  static const std::vector<std::string> pool = make_given_names();
  return pool;
}

const std::vector<std::string>& builtin_surnames() {
  static const std::vector<std::string> pool = make_surnames();
  return pool;
}

const std::vector<double>& builtin_surname_weights() {
  static const std::vector<double> weights = make_surname_weights(builtin_surnames().size());
  return weights;
}

const std::vector<std::string>& builtin_suburbs() {
  static const std::vector<std::string> pool = make_suburbs();
  return pool;
}

const std::vector<std::string>& builtin_postcodes() {
  static const std::vector<std::string> pool = make_postcodes();
  return pool;
}

}  // namespace pprl
