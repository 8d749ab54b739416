use std::fmt;

use super::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Variable(String),
    Number(u64),
    Not,
    Minimize,
    If,
    Dot,
    Comma,
    Colon,
    Semicolon,
    LParen,
    RParen,
    LBrace,
    RBrace,
    At,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) | TokenKind::Variable(s) => write!(f, "`{s}`"),
            TokenKind::Number(n) => write!(f, "`{n}`"),
            TokenKind::Not => f.write_str("`not`"),
            TokenKind::Minimize => f.write_str("`#minimize`"),
            TokenKind::If => f.write_str("`:-`"),
            TokenKind::Dot => f.write_str("`.`"),
            TokenKind::Comma => f.write_str("`,`"),
            TokenKind::Colon => f.write_str("`:`"),
            TokenKind::Semicolon => f.write_str("`;`"),
            TokenKind::LParen => f.write_str("`(`"),
            TokenKind::RParen => f.write_str("`)`"),
            TokenKind::LBrace => f.write_str("`{`"),
            TokenKind::RBrace => f.write_str("`}`"),
            TokenKind::At => f.write_str("`@`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub col: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits source text into tokens. `%` comments run to end of line.
pub fn tokenize(text: &str) -> Result<Vec<Token>, Error> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);

    while let Some(&c) = chars.peek() {
        let (start_line, start_col) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };

        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '%' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump(&mut chars);
            }
            continue;
        }

        let kind = match c {
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_ident_char(c) {
                        break;
                    }
                    word.push(c);
                    bump(&mut chars);
                }
                if word == "not" {
                    TokenKind::Not
                } else if c.is_ascii_lowercase() {
                    TokenKind::Ident(word)
                } else {
                    TokenKind::Variable(word)
                }
            }
            '0'..='9' => {
                let mut digits = String::new();
                while let Some(&c) = chars.peek() {
                    if !c.is_ascii_digit() {
                        break;
                    }
                    digits.push(c);
                    bump(&mut chars);
                }
                let n = digits.parse().map_err(|_| Error::Lex {
                    line: start_line,
                    col: start_col,
                    ch: c,
                })?;
                TokenKind::Number(n)
            }
            '#' => {
                bump(&mut chars);
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_ident_char(c) {
                        break;
                    }
                    word.push(c);
                    bump(&mut chars);
                }
                if word != "minimize" {
                    return Err(Error::Lex {
                        line: start_line,
                        col: start_col,
                        ch: '#',
                    });
                }
                TokenKind::Minimize
            }
            ':' => {
                bump(&mut chars);
                if chars.peek() == Some(&'-') {
                    bump(&mut chars);
                    TokenKind::If
                } else {
                    TokenKind::Colon
                }
            }
            '.' | ',' | ';' | '(' | ')' | '{' | '}' | '@' => {
                bump(&mut chars);
                match c {
                    '.' => TokenKind::Dot,
                    ',' => TokenKind::Comma,
                    ';' => TokenKind::Semicolon,
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    '{' => TokenKind::LBrace,
                    '}' => TokenKind::RBrace,
                    _ => TokenKind::At,
                }
            }
            other => {
                return Err(Error::Lex {
                    line: start_line,
                    col: start_col,
                    ch: other,
                })
            }
        };
        tokens.push(Token {
            kind,
            line: start_line,
            col: start_col,
        });
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<TokenKind> {
        tokenize(text).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn fact_tokens() {
        assert_eq!(
            kinds("symptom(cough)."),
            vec![
                TokenKind::Ident("symptom".into()),
                TokenKind::LParen,
                TokenKind::Ident("cough".into()),
                TokenKind::RParen,
                TokenKind::Dot,
            ]
        );
    }

    #[test]
    fn comment_only() {
        assert!(kinds("% note\n").is_empty());
        assert!(kinds("% no newline").is_empty());
    }

    #[test]
    fn minimize_statement_token_count() {
        // #minimize { 1 , S : add ( symptom ( S ) ) } .
        let toks = kinds("#minimize { 1, S : add(symptom(S)) }.");
        assert_eq!(toks.len(), 15);
        assert_eq!(toks[0], TokenKind::Minimize);
        assert_eq!(toks[2], TokenKind::Number(1));
        assert_eq!(toks[14], TokenKind::Dot);
    }

    #[test]
    fn if_versus_colon() {
        assert_eq!(
            kinds(":- a : b"),
            vec![
                TokenKind::If,
                TokenKind::Ident("a".into()),
                TokenKind::Colon,
                TokenKind::Ident("b".into()),
            ]
        );
    }

    #[test]
    fn variables_and_keywords() {
        assert_eq!(
            kinds("not X _ _y nothing"),
            vec![
                TokenKind::Not,
                TokenKind::Variable("X".into()),
                TokenKind::Variable("_".into()),
                TokenKind::Variable("_y".into()),
                TokenKind::Ident("nothing".into()),
            ]
        );
    }

    #[test]
    fn label_marker() {
        assert_eq!(
            kinds("@l drive."),
            vec![
                TokenKind::At,
                TokenKind::Ident("l".into()),
                TokenKind::Ident("drive".into()),
                TokenKind::Dot,
            ]
        );
    }

    #[test]
    fn positions_are_tracked() {
        let toks = tokenize("a.\n  b.").unwrap();
        assert_eq!((toks[2].line, toks[2].col), (2, 3));
    }

    #[test]
    fn rejects_foreign_characters() {
        assert_eq!(
            tokenize("a :- b & c.").unwrap_err(),
            Error::Lex {
                line: 1,
                col: 8,
                ch: '&'
            }
        );
        assert!(matches!(
            tokenize("#show a/1.").unwrap_err(),
            Error::Lex { ch: '#', .. }
        ));
    }
}
