from datetime import date, timedelta


class Loan:
    def __init__(self, member, book, days=21):
        self.member = member
        self.book = book
        self.due = date.today() + timedelta(days=days)

    def is_overdue(self, today):
        return today > self.due


class LoanService:
    def __init__(self, catalog, notifier):
        self.catalog = catalog
        self.notifier = notifier
        self._loans = []

    def checkout(self, member, isbn):
        book = self.catalog.find_by_isbn(isbn)
        if book is None or book.available_copies() == 0:
            raise LookupError(isbn)
        loan = Loan(member, book)
        self._loans.append(loan)
        self.notifier.send_receipt(member, loan)
        return loan

    def overdue(self, today):
        return [l for l in self._loans if l.is_overdue(today)]
