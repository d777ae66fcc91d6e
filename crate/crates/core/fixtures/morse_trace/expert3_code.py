
def translate_morse_code(morse_words, morse_dict):
    translated_words = []
    for word in morse_words:
        translated_word = []
        for letter in word.split():
            # Using next() with a default value to avoid StopIteration
            translated_letter = next((key for key, value in morse_dict.items() if value == letter), '?')
            translated_word.append(translated_letter)
        translated_words.append(''.join(translated_word))
    return translated_words

morse_words = [['- . .-', '-.-. --- ..-. ..-. . .', '... ..- --. .- .-.']]
morse_dict = {
    "A": ".-",
    "B": "-...",
    "C": "-.-.",
    "D": "-..",
    "E": ".",
    "F": "..-.",
    "G": "--.",
    "H": "....",
    "I": "..",
    "J": ".---",
    "K": "-.-",
    "L": ".-..",
    "M": "--",
    "N": "-.",
    "O": "---",
    "P": ".--.",
    "Q": "--.-",
    "R": ".-.",
    "S": "...",
    "T": "-",
    "U": "..-",
    "V": "...-",
    "W": ".--",
    "X": "-..-",
    "Y": "-.--",
    "Z": "--..",
    "1": ".----",
    "2": "..---",
    "3": "...--",
    "4": "....-",
    "5": ".....",
    "6": "-....",
    "7": "--...",
    "8": "---..",
    "9": "----.",
    "0": "-----"
}

for words in morse_words:
    translated = translate_morse_code(words, morse_dict)
    print(translated)

