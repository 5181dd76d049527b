//! Part-of-speech tagging over the 12-tag universal set.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use crate::corpus::{URL_TOKEN, USER_TOKEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Noun,
    Verb,
    Adj,
    Adv,
    Pron,
    Det,
    Adp,
    Num,
    Conj,
    Prt,
    Punct,
    X,
}

impl Tag {
    pub const ALL: [Tag; 12] = [
        Tag::Noun,
        Tag::Verb,
        Tag::Adj,
        Tag::Adv,
        Tag::Pron,
        Tag::Det,
        Tag::Adp,
        Tag::Num,
        Tag::Conj,
        Tag::Prt,
        Tag::Punct,
        Tag::X,
    ];
    pub const COUNT: usize = 12;

    /// Position of this tag in one-hot encodings.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Noun => "NOUN",
            Tag::Verb => "VERB",
            Tag::Adj => "ADJ",
            Tag::Adv => "ADV",
            Tag::Pron => "PRON",
            Tag::Det => "DET",
            Tag::Adp => "ADP",
            Tag::Num => "NUM",
            Tag::Conj => "CONJ",
            Tag::Prt => "PRT",
            Tag::Punct => "PUNCT",
            Tag::X => "X",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Assigns one tag per token.
pub trait PosTagger: Send + Sync {
    fn tag(&self, tokens: &[String]) -> Vec<Tag>;
}

/// Closed-class lexicon plus suffix heuristics. Tags each token
/// independently of its context.
#[derive(Debug, Clone)]
pub struct RuleTagger {
    lexicon: HashMap<String, Tag>,
}

const LEXICON: &[(Tag, &str)] = &[
    (
        Tag::Pron,
        "i me my mine myself you your yours yourself he him his himself she her hers herself \
         it its itself we us our ours ourselves they them their theirs themselves who whom \
         whose what someone somebody everyone everybody anyone nobody nothing something \
         everything im u ur",
    ),
    (Tag::Det, "a an the this that these those some any every each no another either neither all both which"),
    (
        Tag::Adp,
        "in on at of for with from by about into over under after before since during without \
         through like because although though while if unless until whereas as than upon \
         against between among around within near",
    ),
    (Tag::Conj, "and or but nor yet plus"),
    (Tag::Prt, "to not up off out away down"),
    (
        Tag::Verb,
        "have has had having is am are was were be been being do does did done get gets got \
         gotten feel feels felt go goes went gone can could will would shall should may might \
         must make makes made take takes took think thinks thought know knows knew see sees saw \
         say says said catch catches caught need needs want wants hope let keep kept come came \
         give gave tell told find found hurt hurts suffer suffers suffered diagnosed",
    ),
    (
        Tag::Adv,
        "very really just too also now then today tonight tomorrow yesterday always never \
         still again here there so already even soon ever maybe almost often sometimes",
    ),
    (
        Tag::Adj,
        "good bad sick ill better worse worst best new old sad happy tired sore ok okay \
         great little big many much more most other same few whole",
    ),
    (
        Tag::Noun,
        "cough fever flu cold headache stroke cancer depression attack heart doctor hospital \
         breath chest throat day morning week night time life people mom dad mother father \
         friend family grandma grandpa man woman world year month disease symptom symptoms \
         alzheimers alzheimer parkinsons parkinson dementia pain medicine",
    ),
    (Tag::Num, "one two three four five six seven eight nine ten hundred thousand million"),
];

const SUFFIXES: &[(&str, Tag)] = &[
    ("tion", Tag::Noun),
    ("sion", Tag::Noun),
    ("ness", Tag::Noun),
    ("ment", Tag::Noun),
    ("ity", Tag::Noun),
    ("ism", Tag::Noun),
    ("ance", Tag::Noun),
    ("ence", Tag::Noun),
    ("ship", Tag::Noun),
    ("ing", Tag::Verb),
    ("ed", Tag::Verb),
    ("ize", Tag::Verb),
    ("ise", Tag::Verb),
    ("ly", Tag::Adv),
    ("ous", Tag::Adj),
    ("ful", Tag::Adj),
    ("ive", Tag::Adj),
    ("able", Tag::Adj),
    ("ible", Tag::Adj),
    ("less", Tag::Adj),
    ("ical", Tag::Adj),
    ("al", Tag::Adj),
    ("ic", Tag::Adj),
];

impl Default for RuleTagger {
    fn default() -> Self {
        static SHARED: OnceLock<HashMap<String, Tag>> = OnceLock::new();
        let lexicon = SHARED
            .get_or_init(|| {
                let mut map = HashMap::new();
                for (tag, words) in LEXICON {
                    for w in words.split_whitespace() {
                        map.entry(w.to_string()).or_insert(*tag);
                    }
                }
                map
            })
            .clone();
        RuleTagger { lexicon }
    }
}

impl RuleTagger {
    /// Overrides or extends the lexicon.
    pub fn with_entry(mut self, word: &str, tag: Tag) -> Self {
        self.lexicon.insert(word.to_string(), tag);
        self
    }

    pub fn tag_token(&self, token: &str) -> Tag {
        if let Some(&tag) = self.lexicon.get(token) {
            return tag;
        }
        if token == USER_TOKEN {
            return Tag::Noun;
        }
        if token == URL_TOKEN {
            return Tag::X;
        }
        if token.chars().all(|c| !c.is_alphanumeric()) {
            return Tag::Punct;
        }
        if token.chars().all(|c| c.is_ascii_digit() || c == '.' || c == ',') {
            return Tag::Num;
        }
        let len = token.chars().count();
        SUFFIXES
            .iter()
            .find(|(suffix, _)| len >= suffix.len() + 2 && token.ends_with(suffix))
            .map(|&(_, tag)| tag)
            .unwrap_or(Tag::X)
    }
}

impl PosTagger for RuleTagger {
    fn tag(&self, tokens: &[String]) -> Vec<Tag> {
        tokens.iter().map(|t| self.tag_token(t)).collect()
    }
}
