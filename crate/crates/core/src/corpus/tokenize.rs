//! Rule-based tweet tokenizer.
//!
//! Rules are applied in order: lowercase, URLs and @-mentions become
//! sentinel tokens, the `#` of a hashtag is dropped, and every remaining
//! character that is neither alphanumeric nor whitespace becomes a token
//! of its own.

pub const URL_TOKEN: &str = "<url>";
pub const USER_TOKEN: &str = "<user>";

pub fn is_sentinel(token: &str) -> bool {
    token == URL_TOKEN || token == USER_TOKEN
}

pub fn tokenize(raw_text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in raw_text.split_whitespace() {
        let chunk = chunk.to_lowercase();
        if is_url(&chunk) {
            tokens.push(URL_TOKEN.to_string());
            continue;
        }
        split_chunk(&chunk, &mut tokens);
    }
    tokens
}

fn is_url(chunk: &str) -> bool {
    chunk.starts_with("http://") || chunk.starts_with("https://") || chunk.starts_with("www.")
}

fn is_handle_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn split_chunk(chunk: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let mut word = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_alphanumeric() {
            word.push(c);
            i += 1;
            continue;
        }
        // Sentinels survive re-tokenization of our own output.
        if c == '<' {
            let rest: String = chars[i..].iter().collect();
            if let Some(s) = [URL_TOKEN, USER_TOKEN].iter().find(|s| rest.starts_with(**s)) {
                flush(&mut word, out);
                out.push(s.to_string());
                i += s.chars().count();
                continue;
            }
        }
        let next_is_word = chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if word.is_empty() && c == '@' && chars.get(i + 1).is_some_and(|&n| is_handle_char(n)) {
            i += 1;
            while i < chars.len() && is_handle_char(chars[i]) {
                i += 1;
            }
            out.push(USER_TOKEN.to_string());
            continue;
        }
        if word.is_empty() && c == '#' && next_is_word {
            i += 1;
            continue;
        }
        flush(&mut word, out);
        out.push(c.to_string());
        i += 1;
    }
    flush(&mut word, out);
}

fn flush(word: &mut String, out: &mut Vec<String>) {
    if !word.is_empty() {
        out.push(std::mem::take(word));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split(' ').collect()
    }

    #[test]
    fn punctuation_is_split_off() {
        assert_eq!(tokenize("I have a cough!"), toks("i have a cough !"));
    }

    #[test]
    fn mentions_and_urls_become_sentinels() {
        assert_eq!(tokenize("@bob see https://x.y"), toks("<user> see <url>"));
        assert_eq!(tokenize("www.cdc.gov"), vec![URL_TOKEN]);
        assert_eq!(tokenize("@jane_doe: hi"), toks("<user> : hi"));
    }

    #[test]
    fn hashtag_marker_is_stripped() {
        assert_eq!(tokenize("#flu season"), toks("flu season"));
        assert_eq!(tokenize("# alone"), toks("# alone"));
    }

    #[test]
    fn empty_and_blank_input() {
        assert!(tokenize("").is_empty());
        assert!(tokenize(" \t ").is_empty());
    }

    #[test]
    fn non_ascii_letters_stay_in_words() {
        assert_eq!(tokenize("Grippe ÉTÉ, ok"), toks("grippe été , ok"));
    }

    #[test]
    fn mid_word_at_sign_is_punctuation() {
        assert_eq!(tokenize("a@b.com"), toks("a @ b . com"));
    }

    proptest! {
        #[test]
        fn idempotent_on_joined_output(s in "[ a-zA-Z0-9#@!?.,'<>:/_-]{0,60}") {
            let once = tokenize(&s);
            let twice = tokenize(&once.join(" "));
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn tokens_are_lowercase_and_nonempty(s in "\\PC{0,40}") {
            for t in tokenize(&s) {
                prop_assert!(!t.is_empty());
                prop_assert_eq!(t.to_lowercase(), t.clone());
                prop_assert!(!t.contains(char::is_whitespace));
            }
        }
    }
}
