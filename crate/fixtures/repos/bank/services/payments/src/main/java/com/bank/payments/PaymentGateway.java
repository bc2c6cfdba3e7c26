package com.bank.payments;

public class PaymentGateway {
    public boolean transfer(Payment payment) {
        return payment.amount() > 0;
    }
}
