//! Closed-class word tables and a small rule-based lemmatizer.
//!
//! Everything here is static data: pronoun features, discourse connectives,
//! polarity-reversing cues, a first-name gender list and the irregular
//! inflection tables used both for lemmatization and for generating the
//! morphological variants of web queries.

use crate::docmodel::{Gender, Number, PosClass};

/// Pronoun lexicon: surface form → (gender, number).
const PRONOUNS: &[(&str, Gender, Number)] = &[
    ("he", Gender::Masc, Number::Sing),
    ("him", Gender::Masc, Number::Sing),
    ("his", Gender::Masc, Number::Sing),
    ("himself", Gender::Masc, Number::Sing),
    ("she", Gender::Fem, Number::Sing),
    ("her", Gender::Fem, Number::Sing),
    ("hers", Gender::Fem, Number::Sing),
    ("herself", Gender::Fem, Number::Sing),
    ("it", Gender::Neut, Number::Sing),
    ("its", Gender::Neut, Number::Sing),
    ("itself", Gender::Neut, Number::Sing),
    ("they", Gender::Unknown, Number::Plur),
    ("them", Gender::Unknown, Number::Plur),
    ("their", Gender::Unknown, Number::Plur),
    ("theirs", Gender::Unknown, Number::Plur),
    ("themselves", Gender::Unknown, Number::Plur),
    ("i", Gender::Unknown, Number::Sing),
    ("me", Gender::Unknown, Number::Sing),
    ("my", Gender::Unknown, Number::Sing),
    ("we", Gender::Unknown, Number::Plur),
    ("us", Gender::Unknown, Number::Plur),
    ("our", Gender::Unknown, Number::Plur),
    ("you", Gender::Unknown, Number::Unknown),
    ("your", Gender::Unknown, Number::Unknown),
];

/// Discourse connectives recorded between neighboring triples.
pub const CONNECTIVES: [&str; 12] = [
    "because",
    "therefore",
    "but",
    "so",
    "although",
    "though",
    "however",
    "since",
    "thus",
    "while",
    "yet",
    "hence",
];

/// Connectives that reverse the polarity of the predicate they precede.
pub const REVERSING_CONNECTIVES: [&str; 5] = ["but", "although", "though", "however", "yet"];

/// Negative comparative adverbs that reverse predicate polarity.
pub const NEGATIVE_COMPARATIVES: [&str; 5] = ["less", "lower", "fewer", "worse", "least"];

const TO_BE: [&str; 8] = ["be", "is", "are", "was", "were", "am", "been", "being"];

const MALE_NAMES: &[&str] = &[
    "adam", "bill", "bob", "charles", "dan", "david", "eric", "frank", "george", "henry", "jack",
    "james", "jim", "joe", "john", "mark", "michael", "paul", "pete", "peter", "robert", "sam",
    "steve", "tom", "william",
];

const FEMALE_NAMES: &[&str] = &[
    "alice", "amy", "ann", "anna", "beth", "carol", "emma", "grace", "helen", "jane", "joan",
    "julia", "kate", "laura", "linda", "lisa", "lucy", "mary", "nancy", "rachel", "sally", "sarah",
    "susan", "sue", "susie",
];

/// Irregular verbs as (lemma, 3rd-singular, past, past participle, gerund).
const IRREGULAR_VERBS: &[(&str, &str, &str, &str, &str)] = &[
    ("be", "is", "was", "been", "being"),
    ("have", "has", "had", "had", "having"),
    ("do", "does", "did", "done", "doing"),
    ("go", "goes", "went", "gone", "going"),
    ("eat", "eats", "ate", "eaten", "eating"),
    ("give", "gives", "gave", "given", "giving"),
    ("take", "takes", "took", "taken", "taking"),
    ("see", "sees", "saw", "seen", "seeing"),
    ("run", "runs", "ran", "run", "running"),
    ("fall", "falls", "fell", "fallen", "falling"),
    ("steal", "steals", "stole", "stolen", "stealing"),
    ("catch", "catches", "caught", "caught", "catching"),
    ("hit", "hits", "hit", "hit", "hitting"),
    ("win", "wins", "won", "won", "winning"),
    ("lose", "loses", "lost", "lost", "losing"),
    ("pay", "pays", "paid", "paid", "paying"),
    ("tell", "tells", "told", "told", "telling"),
    ("lie", "lies", "lied", "lied", "lying"),
    ("feel", "feels", "felt", "felt", "feeling"),
    ("fear", "fears", "feared", "feared", "fearing"),
    ("get", "gets", "got", "gotten", "getting"),
    ("make", "makes", "made", "made", "making"),
    ("bite", "bites", "bit", "bitten", "biting"),
    ("fly", "flies", "flew", "flown", "flying"),
    ("sing", "sings", "sang", "sung", "singing"),
    ("write", "writes", "wrote", "written", "writing"),
    ("buy", "buys", "bought", "bought", "buying"),
    ("sell", "sells", "sold", "sold", "selling"),
    ("teach", "teaches", "taught", "taught", "teaching"),
    ("think", "thinks", "thought", "thought", "thinking"),
    ("bring", "brings", "brought", "brought", "bringing"),
    ("leave", "leaves", "left", "left", "leaving"),
    ("fit", "fits", "fit", "fit", "fitting"),
    ("bend", "bends", "bent", "bent", "bending"),
    ("break", "breaks", "broke", "broken", "breaking"),
    ("hide", "hides", "hid", "hidden", "hiding"),
    ("swim", "swims", "swam", "swum", "swimming"),
    ("beat", "beats", "beat", "beaten", "beating"),
    ("forgive", "forgives", "forgave", "forgiven", "forgiving"),
    ("find", "finds", "found", "found", "finding"),
    ("sleep", "sleeps", "slept", "slept", "sleeping"),
    ("wake", "wakes", "woke", "woken", "waking"),
    ("meet", "meets", "met", "met", "meeting"),
    ("put", "puts", "put", "put", "putting"),
];

const EXTRA_VERB_FORMS: &[(&str, &str)] = &[("are", "be"), ("am", "be"), ("were", "be")];

/// Regular verbs ending in a silent `e` that the suffix rules cannot recover.
const SILENT_E_VERBS: &[&str] = &[
    "examine",
    "phone",
    "tease",
    "praise",
    "ignore",
    "imagine",
    "determine",
    "raise",
    "cause",
    "please",
    "close",
    "refuse",
    "excuse",
    "promise",
    "surprise",
    "admire",
    "require",
    "retire",
];

/// Irregular nouns as (singular, plural).
const IRREGULAR_NOUNS: &[(&str, &str)] = &[
    ("man", "men"),
    ("woman", "women"),
    ("child", "children"),
    ("person", "people"),
    ("mouse", "mice"),
    ("foot", "feet"),
    ("tooth", "teeth"),
    ("goose", "geese"),
    ("fish", "fish"),
    ("sheep", "sheep"),
    ("deer", "deer"),
    ("knife", "knives"),
    ("wolf", "wolves"),
    ("thief", "thieves"),
    ("leaf", "leaves"),
    ("wife", "wives"),
];

pub fn pronoun_features(word: &str) -> Option<(Gender, Number)> {
    let w = word.to_lowercase();
    PRONOUNS
        .iter()
        .find(|(p, _, _)| *p == w)
        .map(|&(_, g, n)| (g, n))
}

pub fn connective(word: &str) -> Option<&'static str> {
    let w = word.to_lowercase();
    CONNECTIVES.iter().copied().find(|c| *c == w)
}

pub fn is_reversing_connective(word: &str) -> bool {
    REVERSING_CONNECTIVES.contains(&word.to_lowercase().as_str())
}

pub fn is_negative_comparative(word: &str) -> bool {
    NEGATIVE_COMPARATIVES.contains(&word.to_lowercase().as_str())
}

pub fn is_to_be(word: &str) -> bool {
    TO_BE.contains(&word.to_lowercase().as_str())
}

/// Gender of a first name from the bundled list.
pub fn name_gender(word: &str) -> Option<Gender> {
    let w = word.to_lowercase();
    if MALE_NAMES.contains(&w.as_str()) {
        Some(Gender::Masc)
    } else if FEMALE_NAMES.contains(&w.as_str()) {
        Some(Gender::Fem)
    } else {
        None
    }
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

pub fn lemmatize(word: &str, pos: PosClass) -> String {
    let w = word.to_lowercase();
    match pos {
        PosClass::Verb | PosClass::Aux => lemmatize_verb(&w),
        PosClass::Noun => lemmatize_noun(&w),
        _ => w,
    }
}

fn lemmatize_verb(w: &str) -> String {
    if let Some(&(_, lemma)) = EXTRA_VERB_FORMS.iter().find(|(f, _)| *f == w) {
        return lemma.to_string();
    }
    for &(lemma, s, past, part, ger) in IRREGULAR_VERBS {
        if w == lemma || w == s || w == past || w == part || w == ger {
            return lemma.to_string();
        }
    }
    let b = w.as_bytes();
    if let Some(stem) = w.strip_suffix("ies") {
        return format!("{stem}y");
    }
    if let Some(stem) = w.strip_suffix("ied") {
        return format!("{stem}y");
    }
    if let Some(stem) = w.strip_suffix("ing").filter(|s| s.len() >= 2) {
        return undouble(stem);
    }
    if let Some(stem) = w.strip_suffix("ed").filter(|s| s.len() >= 2) {
        if stem.ends_with('e') {
            return stem.to_string();
        }
        let sb = stem.as_bytes();
        // "liked" → "lik" + e; "played" stays "play"
        let undoubled = undouble(stem);
        if undoubled.len() < stem.len() {
            return undoubled;
        }
        let with_e = format!("{stem}e");
        if SILENT_E_VERBS.contains(&with_e.as_str()) || stem.ends_with('c') {
            return with_e;
        }
        let n = sb.len();
        let cvc = n >= 3 && !is_vowel(sb[n - 1]) && is_vowel(sb[n - 2]) && !is_vowel(sb[n - 3]);
        let short = n == 3 || (n == 4 && !matches!(sb[n - 1], b'r' | b'n' | b'l'));
        if cvc && short && !matches!(sb[n - 1], b'w' | b'x' | b'y') {
            return with_e;
        }
        return stem.to_string();
    }
    if b.len() > 3
        && (w.ends_with("ches") || w.ends_with("shes") || w.ends_with("sses") || w.ends_with("xes"))
    {
        return w[..w.len() - 2].to_string();
    }
    if w.len() > 2 && w.ends_with('s') && !w.ends_with("ss") {
        return w[..w.len() - 1].to_string();
    }
    w.to_string()
}

fn undouble(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 3
        && b[n - 1] == b[n - 2]
        && !is_vowel(b[n - 1])
        && !matches!(b[n - 1], b'l' | b's' | b'z')
    {
        stem[..n - 1].to_string()
    } else {
        stem.to_string()
    }
}

fn lemmatize_noun(w: &str) -> String {
    if let Some(&(sing, _)) = IRREGULAR_NOUNS.iter().find(|(s, p)| *p == w || *s == w) {
        return sing.to_string();
    }
    if let Some(stem) = w.strip_suffix("ies").filter(|s| s.len() >= 2) {
        return format!("{stem}y");
    }
    for suffix in ["ches", "shes", "sses", "xes", "zes"] {
        if w.ends_with(suffix) {
            return w[..w.len() - 2].to_string();
        }
    }
    if w.len() > 3
        && w.ends_with('s')
        && !w.ends_with("ss")
        && !w.ends_with("us")
        && !w.ends_with("is")
    {
        return w[..w.len() - 1].to_string();
    }
    w.to_string()
}

pub fn noun_plural(lemma: &str) -> String {
    if let Some(&(_, plural)) = IRREGULAR_NOUNS.iter().find(|(s, _)| *s == lemma) {
        return plural.to_string();
    }
    let b = lemma.as_bytes();
    if lemma.ends_with('y') && b.len() >= 2 && !is_vowel(b[b.len() - 2]) {
        return format!("{}ies", &lemma[..lemma.len() - 1]);
    }
    if ["s", "x", "z", "ch", "sh"]
        .iter()
        .any(|s| lemma.ends_with(s))
    {
        return format!("{lemma}es");
    }
    format!("{lemma}s")
}

/// Singular and plural surface forms of a noun lemma, deduplicated.
pub fn noun_forms(lemma: &str) -> Vec<String> {
    let mut forms = vec![lemma.to_string(), noun_plural(lemma)];
    forms.dedup();
    forms
}

/// Present and past tense surface forms of a verb lemma, deduplicated.
pub fn verb_forms(lemma: &str) -> Vec<String> {
    if lemma == "be" {
        return ["is", "are", "was", "were"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    }
    let mut forms = vec![lemma.to_string()];
    if let Some(&(_, s, past, _, _)) = IRREGULAR_VERBS.iter().find(|(l, ..)| *l == lemma) {
        forms.push(s.to_string());
        forms.push(past.to_string());
    } else {
        let b = lemma.as_bytes();
        let third = if lemma.ends_with('y') && b.len() >= 2 && !is_vowel(b[b.len() - 2]) {
            format!("{}ies", &lemma[..lemma.len() - 1])
        } else if ["s", "x", "z", "ch", "sh", "o"]
            .iter()
            .any(|s| lemma.ends_with(s))
        {
            format!("{lemma}es")
        } else {
            format!("{lemma}s")
        };
        let n = b.len();
        let doubles = (3..=4).contains(&n)
            && !is_vowel(b[n - 1])
            && is_vowel(b[n - 2])
            && !is_vowel(b[n - 3])
            && !matches!(b[n - 1], b'w' | b'x' | b'y');
        let past = if lemma.ends_with('e') {
            format!("{lemma}d")
        } else if doubles {
            format!("{lemma}{}ed", b[n - 1] as char)
        } else if lemma.ends_with('y') && b.len() >= 2 && !is_vowel(b[b.len() - 2]) {
            format!("{}ied", &lemma[..lemma.len() - 1])
        } else {
            format!("{lemma}ed")
        };
        forms.push(third);
        forms.push(past);
    }
    let mut seen = Vec::new();
    forms.retain(|f| {
        if seen.contains(f) {
            false
        } else {
            seen.push(f.clone());
            true
        }
    });
    forms
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verb_lemmas() {
        for (w, l) in [
            ("ate", "eat"),
            ("was", "be"),
            ("were", "be"),
            ("chased", "chase"),
            ("played", "play"),
            ("stopped", "stop"),
            ("running", "run"),
            ("carries", "carry"),
            ("scolded", "scold"),
            ("liked", "like"),
            ("feared", "fear"),
            ("slipped", "slip"),
            ("watches", "watch"),
            ("hated", "hate"),
            ("hired", "hire"),
            ("visited", "visit"),
            ("praised", "praise"),
            ("introduced", "introduce"),
            ("opened", "open"),
        ] {
            assert_eq!(lemmatize(w, PosClass::Verb), l, "{w}");
        }
    }

    #[test]
    fn noun_lemmas() {
        for (w, l) in [
            ("worms", "worm"),
            ("men", "man"),
            ("flies", "fly"),
            ("boxes", "box"),
            ("glass", "glass"),
            ("fish", "fish"),
            ("thieves", "thief"),
        ] {
            assert_eq!(lemmatize(w, PosClass::Noun), l, "{w}");
        }
    }

    #[test]
    fn inflection_round_trips_through_lemmatizer() {
        for lemma in ["worm", "box", "fly", "man", "suitcase", "trophy"] {
            assert_eq!(lemmatize(&noun_plural(lemma), PosClass::Noun), lemma);
        }
        for lemma in ["eat", "chase", "carry", "scold", "watch", "slip"] {
            for form in verb_forms(lemma) {
                assert_eq!(lemmatize(&form, PosClass::Verb), lemma, "{form}");
            }
        }
    }

    #[test]
    fn closed_classes() {
        assert_eq!(pronoun_features("He"), Some((Gender::Masc, Number::Sing)));
        assert_eq!(
            pronoun_features("them"),
            Some((Gender::Unknown, Number::Plur))
        );
        assert_eq!(pronoun_features("table"), None);
        assert_eq!(connective("Because"), Some("because"));
        assert!(is_reversing_connective("but"));
        assert!(!is_reversing_connective("because"));
        assert!(is_negative_comparative("less"));
        assert_eq!(name_gender("John"), Some(Gender::Masc));
        assert_eq!(name_gender("Mary"), Some(Gender::Fem));
        assert_eq!(CONNECTIVES.len(), 12);
    }
}
