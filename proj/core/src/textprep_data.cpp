#include "sentinel/textprep.hpp"

namespace sentinel::textprep {

// Versioned built-in stop-word list (v1). Deliberately excludes "do"/"not"
// so that contraction expansions keep their negation visible.
const std::vector<std::string_view>& default_stop_word_list() {
  static const std::vector<std::string_view> kList = {
      "a", "about", "above", "across", "after", "again", "against", "all", "almost", "also",
      "although", "always", "am", "among", "an", "and", "another", "any", "anyone", "anything",
      "are", "as", "at", "be", "became", "because", "become", "becomes", "been", "before",
      "being", "below", "between", "beyond", "both", "but", "by", "came", "can", "cannot",
      "come", "could", "did", "does", "down", "during", "each", "either", "else", "ever",
      "every", "few", "for", "from", "further", "get", "gets", "given", "gives", "go",
      "goes", "gone", "got", "had", "has", "have", "having", "he", "hence", "her",
      "here", "hers", "herself", "him", "himself", "his", "how", "however", "i", "if",
      "in", "indeed", "into", "is", "it", "its", "itself", "just", "least", "less",
      "let", "like", "made", "make", "makes", "many", "may", "me", "might", "mine",
      "more", "moreover", "most", "much", "must", "my", "myself", "neither", "never", "nor",
      "now", "of", "off", "often", "on", "once", "one", "only", "onto", "or",
      "other", "others", "otherwise", "our", "ours", "ourselves", "out", "over", "own", "per",
      "perhaps", "rather", "s", "same", "several", "shall", "she", "should", "since", "so",
      "some", "someone", "something", "still", "such", "t", "than", "that", "the", "their",
      "theirs", "them", "themselves", "then", "there", "therefore", "these", "they", "this", "those",
      "though", "through", "thus", "to", "together", "too", "toward", "under", "until", "up",
      "upon", "us", "very", "was", "we", "were", "what", "when", "where", "whether",
      "which", "while", "who", "whom", "whose", "why", "will", "with", "within", "without",
      "would", "yet", "you", "your", "yours", "yourself", "yourselves",
  };
  return kList;
}

// Versioned built-in contraction table (v1). Expansions are lowercase since
// lowercasing follows expansion in the pipeline.
const std::vector<std::pair<std::string_view, std::string_view>>& default_contraction_list() {
  static const std::vector<std::pair<std::string_view, std::string_view>> kList = {
      {"ain't", "am not"},
      {"aren't", "are not"},
      {"can't", "cannot"},
      {"can't've", "cannot have"},
      {"could've", "could have"},
      {"couldn't", "could not"},
      {"couldn't've", "could not have"},
      {"didn't", "did not"},
      {"doesn't", "does not"},
      {"don't", "do not"},
      {"hadn't", "had not"},
      {"hadn't've", "had not have"},
      {"hasn't", "has not"},
      {"haven't", "have not"},
      {"he'd", "he would"},
      {"he'd've", "he would have"},
      {"he'll", "he will"},
      {"he'll've", "he will have"},
      {"he's", "he is"},
      {"how'd", "how did"},
      {"how'd'y", "how do you"},
      {"how'll", "how will"},
      {"how's", "how is"},
      {"i'd", "i would"},
      {"i'd've", "i would have"},
      {"i'll", "i will"},
      {"i'll've", "i will have"},
      {"i'm", "i am"},
      {"i've", "i have"},
      {"isn't", "is not"},
      {"it'd", "it would"},
      {"it'd've", "it would have"},
      {"it'll", "it will"},
      {"it'll've", "it will have"},
      {"it's", "it is"},
      {"let's", "let us"},
      {"ma'am", "madam"},
      {"mayn't", "may not"},
      {"might've", "might have"},
      {"mightn't", "might not"},
      {"mightn't've", "might not have"},
      {"must've", "must have"},
      {"mustn't", "must not"},
      {"mustn't've", "must not have"},
      {"needn't", "need not"},
      {"needn't've", "need not have"},
      {"o'clock", "of the clock"},
      {"oughtn't", "ought not"},
      {"oughtn't've", "ought not have"},
      {"shan't", "shall not"},
      {"sha'n't", "shall not"},
      {"shan't've", "shall not have"},
      {"she'd", "she would"},
      {"she'd've", "she would have"},
      {"she'll", "she will"},
      {"she'll've", "she will have"},
      {"she's", "she is"},
      {"should've", "should have"},
      {"shouldn't", "should not"},
      {"shouldn't've", "should not have"},
      {"so've", "so have"},
      {"so's", "so is"},
      {"that'd", "that would"},
      {"that'd've", "that would have"},
      {"that's", "that is"},
      {"there'd", "there would"},
      {"there'd've", "there would have"},
      {"there's", "there is"},
      {"they'd", "they would"},
      {"they'd've", "they would have"},
      {"they'll", "they will"},
      {"they'll've", "they will have"},
      {"they're", "they are"},
      {"they've", "they have"},
      {"to've", "to have"},
      {"wasn't", "was not"},
      {"we'd", "we would"},
      {"we'd've", "we would have"},
      {"we'll", "we will"},
      {"we'll've", "we will have"},
      {"we're", "we are"},
      {"we've", "we have"},
      {"weren't", "were not"},
      {"what'll", "what will"},
      {"what'll've", "what will have"},
      {"what're", "what are"},
      {"what's", "what is"},
      {"what've", "what have"},
      {"when's", "when is"},
      {"when've", "when have"},
      {"where'd", "where did"},
      {"where's", "where is"},
      {"where've", "where have"},
      {"who'll", "who will"},
      {"who'll've", "who will have"},
      {"who's", "who is"},
      {"who've", "who have"},
      {"why's", "why is"},
      {"why've", "why have"},
      {"will've", "will have"},
      {"won't", "will not"},
      {"won't've", "will not have"},
      {"would've", "would have"},
      {"wouldn't", "would not"},
      {"wouldn't've", "would not have"},
      {"y'all", "you all"},
      {"y'all'd", "you all would"},
      {"y'all'd've", "you all would have"},
      {"y'all're", "you all are"},
      {"y'all've", "you all have"},
      {"you'd", "you would"},
      {"you'd've", "you would have"},
      {"you'll", "you will"},
      {"you'll've", "you will have"},
      {"you're", "you are"},
      {"you've", "you have"},
  };
  return kList;
}

}  // namespace sentinel::textprep
