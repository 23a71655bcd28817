class Account:
    def __init__(self, owner, balance):
        self.owner = owner
        self.balance = balance
        self.history = []

    def deposit(self, amount):
        if amount <= 0:
            raise ValueError("deposit must be positive")
        self.balance += amount
        self.history.append(("deposit", amount))

    def withdraw(self, amount):
        if amount > self.balance:
            raise ValueError("insufficient funds")
        self.balance -= amount
        self.history.append(("withdraw", amount))

    def statement(self):
        lines = []
        for kind, amount in self.history:
            lines.append(f"{kind}: {amount}")
        return "\n".join(lines)


def transfer(source, target, amount):
    source.withdraw(amount)
    target.deposit(amount)
    return target.balance
