namespace symtrack {}
